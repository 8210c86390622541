"""Command-line front end.

Commands: simulate (run an ensemble experiment, write JSON + CSV reports),
verify (exact check suites), theory (closed-form target tables), compare
(two reports -> total-variation summary).  Exit codes: 0 success, 1 runtime
failure, 2 configuration error.  COKFLUCT_WORKERS caps worker parallelism.
"""

from __future__ import annotations

import csv
import json
import math
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import click

from .ensembles import ConfigError, EnsembleSpec
from .exact_linalg import IntMatrix
from .experiments import ExperimentReport, compare_ensembles, run_experiment
from .oracles import (
    FiniteSupportMatrixLaw,
    verify_balanced_sums,
    verify_chain_claim,
    verify_cok_identity,
    verify_moment_identity,
    verify_w0_decomposition,
    w0_chain_counts,
)
from .pgroups import AbelianPGroup, as_partition, chain_count, ell, enumerate_subgroups
from .theory import FluctuationParams, L_moment, limit_rescaled_hom_moment

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """simulate-command payload; round-trips losslessly through JSON."""

    ensemble: EnsembleSpec
    trials: int
    groups: tuple[AbelianPGroup, ...] = ()
    lambdas: tuple[tuple[int, ...], ...] = ()
    d: int = 3
    zeta: float = 0.0
    workers: int = 1
    output_dir: str = "run"
    reproducible: bool = False
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "ensemble": self.ensemble.to_dict(),
            "trials": self.trials,
            "groups": [{"p": G.p, "lambda": list(G.lam)} for G in self.groups],
            "lambdas": [list(lam) for lam in self.lambdas],
            "d": self.d,
            "zeta": self.zeta,
            "workers": self.workers,
            "output_dir": self.output_dir,
            "reproducible": self.reproducible,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}")
        if "ensemble" not in d:
            raise ConfigError("config needs an 'ensemble' object")
        if "trials" not in d:
            raise ConfigError("config needs a 'trials' count")
        try:
            groups = tuple(
                AbelianPGroup(int(g["p"]), as_partition(g["lambda"]))
                for g in d.get("groups", [])
            )
            lambdas = tuple(as_partition(lam) for lam in d.get("lambdas", []))
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad groups/lambdas: {exc}") from exc
        return cls(
            ensemble=EnsembleSpec.from_dict(d["ensemble"]),
            trials=int(d["trials"]),
            groups=groups,
            lambdas=lambdas,
            d=int(d.get("d", 3)),
            zeta=float(d.get("zeta", 0.0)),
            workers=int(d.get("workers", 1)),
            output_dir=str(d.get("output_dir", "run")),
            reproducible=bool(d.get("reproducible", False)),
        )


def _json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode()


def write_report_files(report: ExperimentReport, out_dir: Path, config: RunConfig) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_bytes(_json_bytes(config.to_dict()))
    payload = report.to_dict()
    if not config.reproducible:
        payload["meta"] = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")}
    (out_dir / "report.json").write_bytes(_json_bytes(payload))

    with (out_dir / "hom_moments.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "mean", "ci_low", "ci_high", "target", "count"])
        for key, est in sorted(report.hom_moments.items()):
            w.writerow([key, est.mean, est.ci_low, est.ci_high, est.target, est.count])
    with (out_dir / "l_moments.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "mean", "ci_low", "ci_high", "target", "count"])
        for key, est in sorted(report.l_moments.items()):
            w.writerow([key, est.mean, est.ci_low, est.ci_high, est.target, est.count])
    with (out_dir / "centered_histogram.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vector", "count", "probability"])
        total = max(1, report.included_count)
        for vec, count in sorted(report.centered_counts.items()):
            w.writerow(["(" + ",".join(map(str, vec)) + ")", count, count / total])


def _parse_group(text: str) -> AbelianPGroup:
    # "2:3,1" -> p = 2, lambda = (3, 1); "2:" is the trivial 2-group
    p_str, _, lam_str = text.partition(":")
    lam = tuple(int(x) for x in lam_str.replace("(", "").replace(")", "").split(",") if x)
    return AbelianPGroup(int(p_str), as_partition(lam))


def _parse_partition(text: str) -> tuple[int, ...]:
    return as_partition(
        int(x) for x in text.replace("(", "").replace(")", "").split(",") if x
    )


@click.group()
def main():
    """Cokernel-fluctuation laboratory for random block triangular matrices."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), help="JSON config file.")
@click.option("--trials", type=int, default=None, help="Override trial count.")
@click.option("--seed", type=int, default=None, help="Override master seed.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None, help="Override output directory.")
@click.option("--workers", type=int, default=None, help="Override worker budget.")
@click.option("--reproducible", is_flag=True, default=False, help="Strip timestamps from outputs.")
def simulate(config_path, trials, seed, out_dir, workers, reproducible):
    """Run an experiment from a config file and write report JSON + CSVs."""
    try:
        if config_path is None:
            raise ConfigError("simulate needs --config")
        raw = json.loads(Path(config_path).read_text())
        if trials is not None:
            raw["trials"] = trials
        if workers is not None:
            raw["workers"] = workers
        if out_dir is not None:
            raw["output_dir"] = str(out_dir)
        if reproducible:
            raw["reproducible"] = True
        if seed is not None:
            raw.setdefault("ensemble", {})["master_seed"] = seed
        config = RunConfig.from_dict(raw)
    except (ConfigError, json.JSONDecodeError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    try:
        report = run_experiment(
            config.ensemble,
            config.trials,
            config.groups,
            config.lambdas,
            config.d,
            zeta=config.zeta,
            workers=config.workers,
        )
        write_report_files(report, Path(config.output_dir), config)
    except Exception as exc:  # runtime failure, not config
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"report written to {config.output_dir}")


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _suite_identity() -> list[tuple[str, bool, str]]:
    checks = []
    laws = {
        "uniform01": [(0, Fraction(1, 2)), (1, Fraction(1, 2))],
        "uniform012": [(0, Fraction(1, 3)), (1, Fraction(1, 3)), (2, Fraction(1, 3))],
        "skewed": [(0, Fraction(1, 2)), (1, Fraction(1, 3)), (3, Fraction(1, 6))],
    }
    groups = [
        AbelianPGroup(2, (1,)),
        AbelianPGroup(3, (1,)),
        AbelianPGroup(2, (1, 1)),
        AbelianPGroup(2, (2,)),
    ]
    for name, support in laws.items():
        for n in (1, 2):
            law = FiniteSupportMatrixLaw(n, n, tuple(support))
            for G in groups:
                res = verify_moment_identity(law, G)
                checks.append(
                    (
                        f"Hom-moment identity, {name}, n={n}, G={G.label()}",
                        res.equal,
                        f"lhs={res.lhs} rhs={res.rhs}",
                    )
                )
    return checks


def _suite_balanced() -> list[tuple[str, bool, str]]:
    checks = []
    G0 = AbelianPGroup(2, (1,))
    u01 = [(0, Fraction(1, 2)), (1, Fraction(1, 2))]
    res = verify_balanced_sums(FiniteSupportMatrixLaw(8, 8, tuple(u01)), G0)
    expected = 1 - Fraction(1, 256)
    checks.append(
        (
            "generated-vector sum, uniform mod 2, n=8",
            res.s_min == expected and res.s_max == expected,
            f"s_min={res.s_min} s_max={res.s_max} expected={expected}",
        )
    )
    bern = [(0, Fraction(7, 10)), (1, Fraction(3, 10))]
    # |S_max - 1| peaks at n=5 for this law and decays strictly afterwards,
    # so the monotone stretch of the grid starts at 6; |S_min - 1| is
    # monotone from the start.
    max_gaps = []
    min_gaps = []
    for n in (4, 6, 8, 10):
        r = verify_balanced_sums(FiniteSupportMatrixLaw(n, n, tuple(bern)), G0)
        max_gaps.append(abs(r.s_max - 1))
        min_gaps.append(abs(r.s_min - 1))
    checks.append(
        (
            "generated-vector max-sum gap decreasing, Bernoulli(3/10), n in {6,8,10}",
            max_gaps[1] > max_gaps[2] > max_gaps[3],
            f"gaps={[float(x) for x in max_gaps[1:]]}",
        )
    )
    checks.append(
        (
            "generated-vector min-sum gap decreasing, Bernoulli(3/10), n in {4,6,8,10}",
            min_gaps[0] > min_gaps[1] > min_gaps[2] > min_gaps[3],
            f"gaps={[float(x) for x in min_gaps]}",
        )
    )
    return checks


def _suite_cok(instances: int = 100, seed: int = 20260810) -> list[tuple[str, bool, str]]:
    rng = random.Random(seed)
    failures = 0
    for _ in range(instances):
        n = rng.randint(1, 3)
        k = rng.randint(1, 4)
        factors = [
            IntMatrix.from_rows(
                [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
            )
            for _ in range(k)
        ]
        if not verify_cok_identity(factors):
            failures += 1
    return [
        (
            f"embedding/product cokernel identity, {instances} random instances",
            failures == 0,
            f"failures={failures}",
        )
    ]


def _suite_chains(samples: int = 10 ** 4, seed: int = 7) -> list[tuple[str, bool, str]]:
    G = AbelianPGroup(2, (2, 1))
    lat = enumerate_subgroups(G)
    sets = lat.as_sets()
    rng = random.Random(seed)
    violations = 0
    for _ in range(samples):
        seq = [sets[rng.randrange(len(sets))] for _ in range(10)]
        if not verify_chain_claim(G, seq):
            violations += 1
    return [
        (
            f"chain growth inequality, {samples} random sequences over Sg(Z/4+Z/2)",
            violations == 0,
            f"violations={violations}",
        )
    ]


def _suite_decomposition() -> list[tuple[str, bool, str]]:
    checks = []
    ok = True
    detail = []
    for G in (AbelianPGroup(2, (1,)), AbelianPGroup(2, (2,)), AbelianPGroup(2, (1, 1))):
        for k in range(1, 7):
            counts = w0_chain_counts(G, k)
            for i in range(ell(G) + 1):
                expected = chain_count(G, i) * math.comb(k, i)
                got = counts.get(i, 0)
                if got != expected:
                    ok = False
                    detail.append(f"G={G.label()} k={k} i={i}: {got} != {expected}")
    checks.append(
        (
            "multichain count = c(G,i) * C(k,i), |G| <= 4, k <= 6",
            ok,
            "; ".join(detail) or "all equal",
        )
    )
    law = FiniteSupportMatrixLaw(1, 1, ((0, Fraction(1, 2)), (1, Fraction(1, 2))))
    res = verify_w0_decomposition(law, AbelianPGroup(2, (1,)), i=1, k=2, block_sizes=(1, 1))
    checks.append(
        (
            "w=0 probability decomposition recorded (no threshold)",
            res.vector_count == 2,
            f"sum={res.total} target={res.target} vectors={res.vector_count}",
        )
    )
    return checks


SUITES = {
    "identity": _suite_identity,
    "balanced": _suite_balanced,
    "cok": _suite_cok,
    "chains": _suite_chains,
    "decomposition": _suite_decomposition,
}


@main.command()
@click.argument("suite", type=click.Choice(sorted(SUITES) + ["all"]))
def verify(suite):
    """Run an exact verification suite; nonzero exit on any failure."""
    names = sorted(SUITES) if suite == "all" else [suite]
    failed = 0
    for name in names:
        for check, ok, detail in SUITES[name]():
            status = "PASS" if ok else "FAIL"
            click.echo(f"[{status}] {check}  ({detail})")
            if not ok:
                failed += 1
    if failed:
        click.echo(f"{failed} check(s) failed", err=True)
        sys.exit(1)
    click.echo("all checks passed")


@main.command()
@click.option("--group", "groups", multiple=True, help="Group as 'p:a,b,c', e.g. 2:2,1.")
@click.option("--lam", "lambdas", multiple=True, help="Partition as 'a,b,c'.")
@click.option("--p", "p_", type=int, default=2, show_default=True)
@click.option("--zeta", type=float, default=0.0, show_default=True)
@click.option("--d", type=int, default=3, show_default=True)
def theory(groups, lambdas, p_, zeta, d):
    """Print exact chain counts, rescaled-moment limits, and L-moments."""
    try:
        parsed_groups = [_parse_group(g) for g in groups]
        parsed_lams = [_parse_partition(s) for s in lambdas]
        params = FluctuationParams(p_, zeta, d)
        lines = []
        for G in parsed_groups:
            l = ell(G)
            counts = [chain_count(G, i) for i in range(l + 1)]
            limit = limit_rescaled_hom_moment(G)
            lines.append(f"G={G.label()}  ell={l}  c={counts}  limit={limit}")
        for lam in parsed_lams:
            mv = L_moment(lam, params)
            lines.append(
                f"lambda=({','.join(map(str, lam))})  moment={mv.rational} * {mv.scale} = {mv.value}"
            )
    except ValueError as exc:  # includes the lattice order guard
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    for line in lines:
        click.echo(line)


@main.command()
@click.argument("report_a", type=click.Path(exists=True, path_type=Path))
@click.argument("report_b", type=click.Path(exists=True, path_type=Path))
def compare(report_a, report_b):
    """Total-variation summary of two report files."""
    try:
        a = ExperimentReport.from_dict(json.loads(report_a.read_text()))
        b = ExperimentReport.from_dict(json.loads(report_b.read_text()))
        summary = compare_ensembles(a, b)
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    click.echo(json.dumps(summary.to_dict(), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
