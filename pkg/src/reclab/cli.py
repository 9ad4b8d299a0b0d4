"""Command-line surface: reproducible experiments driven by flags or a
previously emitted report config.

Every report embeds the exact config that produced it; ``reclab run
--config report.json`` re-executes that config and reproduces the report
byte for byte.  Exit codes: 0 success, 2 hypothesis failures (and argparse
usage errors), 3 horizon/enumeration cap errors, 1 other input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds as bounds_mod
from . import engine
from .errors import (
    EnumerationCapError,
    HorizonCapError,
    HypothesisError,
    ReclabError,
)
from .distributions import Pmf, compound_pmf, poisson_pmf, polya_aeppli_pmf
from .measures import (
    BernoulliMeasure,
    XorCoupledMeasure,
    model_config,
    model_from_config,
)
from .recurrence import RecurrenceSpec, cylinder_context, gap_profile
from .words import (
    Word,
    constant_word,
    overlap_set,
    parse_word,
    thue_morse_prefix,
)

_NAMED_VALUES = {"pi", "e", "sqrt2", "ln2", "phi"}


def _digits_word(base: int, length: int, value: str) -> Word:
    """Base-`base` expansion of the fractional part of `value`, `length`
    digits; value is a named constant, a rational p/q, or a decimal."""
    if base < 2 or length < 1:
        raise ReclabError(f"need base >= 2 and length >= 1, got {base}, {length}")
    if value in _NAMED_VALUES:
        import mpmath

        with mpmath.workdps(int(length * math.log10(base)) + 30):
            x = {
                "pi": mpmath.pi,
                "e": mpmath.e,
                "sqrt2": mpmath.sqrt(2),
                "ln2": mpmath.ln(2),
                "phi": mpmath.phi,
            }[value] % 1
            digits = []
            for _ in range(length):
                x = x * base
                d = int(mpmath.floor(x))
                digits.append(min(d, base - 1))
                x -= d
        return Word(tuple(digits))
    frac = Fraction(value) % 1
    digits = []
    for _ in range(length):
        frac *= base
        d = int(frac)
        digits.append(d)
        frac -= d
    return Word(tuple(digits))


def resolve_word(spec: str) -> Word:
    """Parse a word argument: explicit ("101" or JSON array), "ones:n",
    "thue-morse:n", or "digits:<base>:<length>:<value>"."""
    if spec.startswith("ones:"):
        return constant_word(1, int(spec.split(":")[1]))
    if spec.startswith("thue-morse:"):
        return thue_morse_prefix(int(spec.split(":")[1]))
    if spec.startswith("digits:"):
        _, base, length, value = spec.split(":", 3)
        return _digits_word(int(base), int(length), value)
    return parse_word(spec)


def resolve_model(spec: str | None, word: Word, word_spec: str = ""):
    """Parse a model argument: "uniform:k", "bernoulli:p1", "xor:p1",
    inline JSON, or a path to a JSON file.  Defaults to the uniform
    product measure on the word's alphabet (the stated base for digits
    words)."""
    if spec is None:
        if word_spec.startswith("digits:"):
            size = int(word_spec.split(":")[1])
        else:
            size = max(2, max(word.symbols) + 1)
        return BernoulliMeasure.uniform(size)
    if spec.startswith("uniform:"):
        return BernoulliMeasure.uniform(int(spec.split(":")[1]))
    if spec == "uniform-binary":
        return BernoulliMeasure.uniform(2)
    if spec.startswith("bernoulli:"):
        return BernoulliMeasure.binary(float(spec.split(":")[1]))
    if spec.startswith("xor:"):
        return XorCoupledMeasure(float(spec.split(":")[1]))
    if spec.strip().startswith("{"):
        return model_from_config(spec)
    return model_from_config(json.loads(Path(spec).read_text()))


def _parse_lags(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _parse_n_list(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def _parse_grid(text: str) -> list[float]:
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        out, v = [], lo
        while v <= hi + 1e-12:
            out.append(round(v, 12))
            v += step
        return out
    return [float(x) for x in text.split(",")]


def _target_pmf(target_cfg: dict, context) -> Pmf:
    kind = target_cfg["kind"]
    t = context["t"]
    if kind == "poisson":
        return poisson_pmf(t)
    if kind == "polya-aeppli":
        return polya_aeppli_pmf(t, context["rho"])
    if kind == "compound":
        return compound_pmf(
            t * (1.0 - context["rho"]), Pmf.from_json(target_cfg["cluster"])
        )
    raise ReclabError(f"unknown target {kind!r}")


def execute(config: dict) -> dict:
    """Run one experiment config and return its report dict."""
    command = config["command"]
    if command == "nonconv":
        return engine.nonconvergence_sweep(
            config["p1"], config["t"], config["n_list"],
            config["trials"], config["seed"],
        )
    if command == "hitting":
        return engine.hitting_time_survival(
            model_from_config(config["model"]),
            Word(tuple(config["word"])),
            RecurrenceSpec.from_config(config["spec"]),
            config["t_grid"], config["trials"], config["seed"],
        )
    if command == "entropy":
        return engine.entropy_estimate(
            model_from_config(config["model"]),
            Word(tuple(config["omega_prefix"])),
            RecurrenceSpec.from_config(config["spec"]),
            config["n_list"], config["trials"], config["seed"],
            window=config.get("window", 40.0),
        )
    if command == "analyze":
        return _analyze(config)
    if command in ("simulate", "compare"):
        return _simulate_or_compare(config)
    if command == "bounds":
        return _bounds_report(config)
    raise ReclabError(f"unknown command {command!r}")


def _analyze(config: dict) -> dict:
    model = model_from_config(config["model"])
    word = Word(tuple(config["word"]))
    spec = RecurrenceSpec.from_config(config["spec"])
    ctx = cylinder_context(model, word, spec)
    g, gamma_n = gap_profile(spec, len(word))
    return {
        "config": config,
        "word": str(word),
        "n": len(word),
        "period": ctx.r,
        "overlaps": sorted(overlap_set(word)),
        "kappa": ctx.kappa,
        "rho": ctx.rho,
        "prob": ctx.prob,
        "horizon": ctx.horizon,
        "g": None if math.isinf(g) else g,
        "gamma_n": gamma_n,
        "decay_rate": model.gamma(),
        "psi": {str(m): model.psi(m) for m in (0, 1, len(word))},
    }


def _simulate_or_compare(config: dict) -> dict:
    model = model_from_config(config["model"])
    word = Word(tuple(config["word"]))
    spec = RecurrenceSpec.from_config(config["spec"])
    emp = engine.simulate_counts(
        model, word, spec, config["trials"], config["seed"],
        n_horizon=config.get("n_horizon"),
    )
    if config["command"] == "simulate":
        report = engine.ExperimentReport(
            empirical=emp, target=None, tv=None, tv_radius=None,
            mc_radius=engine.mc_radius(config["trials"]), config=config,
        )
        return report.to_json()
    ctx = cylinder_context(model, word, spec)
    target = _target_pmf(config["target"], {"t": spec.t, "rho": ctx.rho})
    bound_name = config.get("bound")
    bound_value = None
    if bound_name:
        bound_value = bounds_mod.BOUNDS[bound_name](
            bounds_mod.bound_inputs(model, word, spec)
        )
    report = engine.compare_to_target(
        emp, target, bound_name=bound_name, bound_value=bound_value, config=config
    )
    return report.to_json()


def _bounds_report(config: dict) -> dict:
    preset = config["preset"]
    if "inputs" in config:
        bi = bounds_mod.BoundInputs.from_json(config["inputs"])
    else:
        bi = bounds_mod.bound_inputs(
            model_from_config(config["model"]),
            Word(tuple(config["word"])),
            RecurrenceSpec.from_config(config["spec"]),
        )
    value = bounds_mod.BOUNDS[preset](bi)
    return {"config": config, "inputs": bi.to_json(), "preset": preset, "value": value}


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def _emit(report: dict, out: str | None, fmt: str) -> None:
    if fmt == "csv":
        rows = report.get("rows")
        if rows is None:
            hist = report["empirical"]["counts"]
            rows = [{"value": k, "count": v} for k, v in hist.items()]
        text = _rows_to_csv(rows)
    else:
        text = engine.canonical_json(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _print_analysis(report: dict) -> None:
    order = [
        "word", "n", "period", "overlaps", "kappa", "rho", "prob",
        "horizon", "g", "gamma_n", "decay_rate",
    ]
    for key in order:
        print(f"{key:12} {report[key]}")
    for m, v in report["psi"].items():
        print(f"{f'psi[{m}]':12} {v}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reclab",
        description="Poisson / compound-Poisson recurrence-count laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_required=True):
        p.add_argument("--d", default="1", help="lags, e.g. 1,2")
        p.add_argument("--t", type=float, default=1.0, help="intensity")
        p.add_argument("--model", default=None, help="uniform:k | bernoulli:p1 | xor:p1 | JSON | path")
        p.add_argument("--trials", type=int, default=100_000)
        p.add_argument("--seed", type=int, required=seed_required)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("analyze", help="combinatorial and measure summary of a word")
    p.add_argument("word")
    p.add_argument("--d", default="1")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--model", default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="empirical law of the recurrence count")
    p.add_argument("word")
    common(p)

    p = sub.add_parser("compare", help="simulate and compare against a target law")
    p.add_argument("word")
    common(p)
    p.add_argument("--target", choices=("poisson", "polya-aeppli", "compound"),
                   default="poisson")
    p.add_argument("--cluster", default=None, help="JSON pmf file for --target compound")
    p.add_argument("--bound", choices=tuple(bounds_mod.BOUNDS), default=None)

    p = sub.add_parser("nonconv", help="even/odd zero-count sweep for the XOR measure")
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n", required=True, help="word lengths, e.g. 8..13 or 8,10")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("hitting", help="rescaled first-hit survival vs the exponential law")
    p.add_argument("word")
    common(p)
    p.add_argument("--t-grid", default="0.25:3:0.25")

    p = sub.add_parser("entropy", help="first-hit growth rate along prefixes")
    p.add_argument("word", help="the prefix supplying the nested targets")
    common(p)
    p.add_argument("--n", required=True, help="prefix lengths, e.g. 6,10,14")
    p.add_argument("--window", type=float, default=40.0)

    p = sub.add_parser("bounds", help="evaluate an approximation error bound")
    p.add_argument("--preset", choices=tuple(bounds_mod.BOUNDS), required=True)
    p.add_argument("--inputs", default=None, help="JSON file with the raw inputs")
    p.add_argument("--word", default=None)
    p.add_argument("--d", default="1")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--model", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("run", help="re-execute an embedded report config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _config_from_args(args) -> dict:
    if args.command == "nonconv":
        return {
            "command": "nonconv", "p1": args.p1, "t": args.t,
            "n_list": _parse_n_list(args.n), "trials": args.trials, "seed": args.seed,
        }
    word = resolve_word(args.word)
    model = resolve_model(args.model, word, args.word)
    spec = {"d": list(_parse_lags(args.d)), "t": args.t}
    base = {
        "command": args.command,
        "model": model_config(model),
        "word": list(word.symbols),
        "spec": spec,
    }
    if args.command == "analyze":
        return base
    base["trials"] = args.trials
    base["seed"] = args.seed
    if args.command == "compare":
        target = {"kind": args.target}
        if args.target == "compound":
            if not args.cluster:
                raise ReclabError("--target compound needs --cluster")
            target["cluster"] = json.loads(Path(args.cluster).read_text())
        base["target"] = target
        if args.bound:
            base["bound"] = args.bound
    elif args.command == "hitting":
        base["t_grid"] = _parse_grid(args.t_grid)
    elif args.command == "entropy":
        base["omega_prefix"] = base.pop("word")
        base["n_list"] = _parse_n_list(args.n)
        base["window"] = args.window
    return base


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = json.loads(Path(args.config).read_text())["config"]
            report = execute(config)
            _emit(report, args.out, args.format)
            return 0
        if args.command == "bounds":
            config = {"command": "bounds", "preset": args.preset}
            if args.inputs:
                config["inputs"] = json.loads(Path(args.inputs).read_text())
            else:
                if not args.word:
                    raise ReclabError("bounds needs --inputs or --word")
                word = resolve_word(args.word)
                config["model"] = model_config(resolve_model(args.model, word, args.word))
                config["word"] = list(word.symbols)
                config["spec"] = {"d": list(_parse_lags(args.d)), "t": args.t}
            report = execute(config)
            print(f"{args.preset} bound = {report['value']}")
            if args.out:
                Path(args.out).write_text(engine.canonical_json(report))
            return 0
        config = _config_from_args(args)
        report = execute(config)
        if args.command == "analyze" and args.format == "text":
            _print_analysis(report)
            if args.out:
                Path(args.out).write_text(engine.canonical_json(report))
            return 0
        _emit(report, args.out, args.format)
        return 0
    except HypothesisError as exc:
        print(f"hypothesis failed: {exc}", file=sys.stderr)
        return 2
    except (HorizonCapError, EnumerationCapError) as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 3
    except ReclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
