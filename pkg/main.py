"""Command-line front end for Seminorm Lab.

Each invocation runs exactly one verb::

    python main.py derive --space finsupp.json --property cnp
    python main.py witness --input witness.json --seed 7
    python main.py falsify --input problem.json --seed 7
    python main.py repro sequence-product --n 3
    python main.py repro smooth-product --k 1
    python main.py convolve --group cyclic --size 3 --gamma "[1,2,0]" --eta "[1,0,1]"
    python main.py theta --base base.json
    python main.py classify-convolution --group infinite-compact --r 0 --s inf --t inf --b-pe yes

Exit codes: 0 Holds/Pass, 1 Fails/Violation, 2 Unknown or inconclusive,
64 input error, 70 a report that fails its own consistency checks.
Reports go to stdout (text, or JSON with ``--json``); logs go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from jsonschema import Draft202012Validator
from pydantic import ValidationError

from cardinal import parse_cardinal
from config import Settings, load_settings
from covering import BaseSpaceDesc, is_sigma_compact, theta
from errors import InputError, SeminormLabError
from falsify import (SampleConfig, check, report_json, report_text, reproduce_sequence_counterexample,
                     reproduce_smooth_blowup, search)
from log_utils import LogCategory, LogLevel, export_debug_logs, log_error, log_info, setup_logging
from models import MODEL_FACTORIES, CircleGrid, CyclicZ, TruncatedZ, convolve, support_measure
from np_engine import (GroupClass, PropertyQuery, QueryKind, Status, Verdict, classify_convolution, derive,
                       product_estimates_verdict, psi_continuity, render_text, replay, space_label,
                       verdict_to_json)
from seminorms import dump, parse_seminorm, parse_space
from witness import (ProductEstimateWitness, base_certificates, cnp_product_estimates,
                     countable_support_witness, direct_sum_combine, target_cnp_product_estimates)

SCHEMA_DIR = Path(__file__).resolve().parent / "schema"

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 64
EXIT_SOFTWARE = 70

_STATUS_EXIT = {Status.HOLDS: EXIT_OK, Status.FAILS: EXIT_FAILS, Status.UNKNOWN: EXIT_UNKNOWN}

# command-line spelling -> GroupClass kind
GROUP_ARGS = {
    "finite": "finite",
    "infinite-discrete": "infiniteDiscrete",
    "infinite-compact": "infiniteCompact",
    "non-compact-non-discrete": "nonCompactNonDiscrete",
}

DEFAULT_T_VALUES = (1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128)


class UsageError(Exception):
    """Malformed command line."""


class CliParser(argparse.ArgumentParser):
    """Argument parser that raises instead of exiting with status 2."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


class ReportError(SeminormLabError):
    """A report that fails its own consistency checks (schema or derivation replay)."""


# --- input documents -------------------------------------------------------

def load_document(value: str) -> Any:
    """Inline JSON text or the path of a UTF-8 JSON file."""
    text = value.strip()
    if text.startswith(("{", "[")):
        return json.loads(text)
    path = Path(value)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"Cannot read input document {path}: {exc.strerror}") from exc


def _seminorm_table(rows: Any) -> Tuple[Tuple[Any, ...], ...]:
    return tuple(tuple(parse_seminorm(item) for item in row) for row in rows)


def _optional_targets(document: Dict[str, Any]) -> Optional[Tuple[Tuple[Any, ...], ...]]:
    targets = document.get("targets")
    return None if targets is None else _seminorm_table(targets)


def _require(document: Dict[str, Any], *keys: str) -> None:
    missing = [key for key in keys if key not in document]
    if missing:
        raise InputError(f"Input document is missing: {', '.join(missing)}")


def build_model(document: Dict[str, Any]):
    """Registered bilinear model from ``{"name": ..., "args": [...]}``."""
    _require(document, "name")
    factory = MODEL_FACTORIES.get(document["name"])
    if factory is None:
        raise InputError(f"Unknown model {document['name']!r}; expected one of {', '.join(MODEL_FACTORIES)}")
    return factory(*document.get("args", []))


def _sample_config(document: Dict[str, Any], seed: Optional[int]) -> SampleConfig:
    if seed is None:
        raise UsageError("randomized checks need --seed")
    strategies = document.get("strategies")
    if strategies is None:
        return SampleConfig(seed=seed, count=int(document.get("count", 10_000)))
    return SampleConfig(seed=seed, count=int(document.get("count", 10_000)), strategies=tuple(strategies))


# --- witness constructions -------------------------------------------------

def _domain_cnp(document: Dict[str, Any]) -> ProductEstimateWitness:
    _require(document, "r", "s", "p", "q")
    p, q = parse_seminorm(document["p"]), parse_seminorm(document["q"])
    return cnp_product_estimates(base_certificates(document["r"], p, "P"),
                                 base_certificates(document["s"], q, "Q"),
                                 targets=_optional_targets(document))


def _target_cnp(document: Dict[str, Any]) -> ProductEstimateWitness:
    _require(document, "C", "P", "p", "q")
    return target_cnp_product_estimates(parse_seminorm(document["P"]), document["C"],
                                        parse_seminorm(document["p"]), parse_seminorm(document["q"]),
                                        targets=_optional_targets(document))


def _direct_sum(document: Dict[str, Any]) -> ProductEstimateWitness:
    _require(document, "C", "P_blocks", "Q_blocks")
    return direct_sum_combine(document["C"], _seminorm_table(document["P_blocks"]),
                              _seminorm_table(document["Q_blocks"]), targets=_optional_targets(document))


def _countable_support(document: Dict[str, Any]) -> ProductEstimateWitness:
    _require(document, "weights")
    return countable_support_witness(document["weights"])


CONSTRUCTIONS: Dict[str, Callable[[Dict[str, Any]], ProductEstimateWitness]] = {
    "domain-cnp": _domain_cnp,
    "target-cnp": _target_cnp,
    "direct-sum": _direct_sum,
    "countable-support": _countable_support,
}


# --- verbs -----------------------------------------------------------------

def _verdict_text(label: str, verdict: Verdict) -> List[str]:
    lines = [f"{label}: {verdict.status.value}"]
    if verdict.derivation is not None:
        lines.append(render_text(verdict.derivation, indent=1))
    if verdict.note:
        lines.append(f"  note: {verdict.note}")
    return lines


def cmd_derive(args: argparse.Namespace, settings: Settings) -> Tuple[Dict[str, Any], List[str], int]:
    space = parse_space(load_document(args.space))

    if args.base is not None:
        M = BaseSpaceDesc.model_validate(load_document(args.base))
        psi = psi_continuity(M, space, args.r)
        report = {
            "command": "derive",
            "property": "psi-continuity",
            "space": dump(space),
            "theta": psi.theta.to_json(),
            "continuous": verdict_to_json(psi.continuous),
            "hypocontinuous": verdict_to_json(psi.hypocontinuous),
        }
        lines = [f"C^{args.r}_c(M) x {space_label(space)} -> C^{args.r}_c(M, {space_label(space)}), "
                 f"theta(M) = {psi.theta}"]
        lines += _verdict_text("continuous", psi.continuous)
        lines += _verdict_text("hypocontinuous", psi.hypocontinuous)
        return report, lines, _STATUS_EXIT[psi.continuous.status]

    if args.property == "product-estimates":
        if args.second is None or args.target is None:
            raise UsageError("product-estimates queries need --second and --target")
        second = parse_space(load_document(args.second))
        target = parse_space(load_document(args.target))
        verdict = product_estimates_verdict(space, second, target)
        subject = f"{space_label(space)} x {space_label(second)} -> {space_label(target)}"
    else:
        kind = QueryKind(args.property)
        query = PropertyQuery(kind, parse_cardinal(args.theta) if args.theta is not None else None)
        verdict = derive(space, query)
        subject = space_label(space)

    replayed = verdict.derivation is None or replay(verdict.derivation)
    if not replayed:
        raise ReportError(f"Derivation for {subject} does not replay")
    report = {
        "command": "derive",
        "property": args.property,
        "space": dump(space),
        "verdict": verdict_to_json(verdict),
        "replayed": replayed,
    }
    if args.theta is not None:
        report["theta"] = parse_cardinal(args.theta).to_json()
    lines = _verdict_text(f"{subject} [{args.property}]", verdict)
    return report, lines, _STATUS_EXIT[verdict.status]


def cmd_witness(args: argparse.Namespace, settings: Settings) -> Tuple[Dict[str, Any], List[str], int]:
    document = load_document(args.input)
    _require(document, "construction")
    builder = CONSTRUCTIONS.get(document["construction"])
    if builder is None:
        raise InputError(f"Unknown construction {document['construction']!r}; "
                         f"expected one of {', '.join(CONSTRUCTIONS)}")
    witness = builder(document)

    report = {"command": "witness", "construction": document["construction"],
              "witness": witness.to_json(), "verification": None}
    lines = [f"{document['construction']} witness", witness.render_text()]
    code = EXIT_OK

    verify = document.get("verify")
    if verify is not None:
        model = build_model(verify.get("model", {}))
        cfg = _sample_config(verify, args.seed)
        outcome = check(model, None, witness, cfg, settings)
        report["verification"] = report_json(outcome)
        lines.append(report_text(outcome))
        code = EXIT_FAILS if outcome.outcome == "Violation" else EXIT_OK
    return report, lines, code


def cmd_falsify(args: argparse.Namespace, settings: Settings) -> Tuple[Dict[str, Any], List[str], int]:
    document = load_document(args.input)
    _require(document, "model", "targets", "p_family", "q_family")
    model = build_model(document["model"])
    cfg = _sample_config(document, args.seed)
    targets = _seminorm_table(document["targets"])
    candidate = ProductEstimateWitness(
        p_family=tuple(parse_seminorm(p) for p in document["p_family"]),
        q_family=tuple(parse_seminorm(q) for q in document["q_family"]),
        provenance=("candidate supplied on the command line",),
        targets=targets,
    )
    runner = search if document.get("search", False) else check
    outcome = runner(model, targets, candidate, cfg, settings)
    report = dict(command="falsify", model=model.name, **report_json(outcome))
    code = EXIT_FAILS if outcome.outcome == "Violation" else EXIT_OK
    return report, [report_text(outcome)], code


def cmd_repro(args: argparse.Namespace, settings: Settings) -> Tuple[Dict[str, Any], List[str], int]:
    if args.example == "sequence-product":
        if args.n is None:
            raise UsageError("sequence-product needs --n")
        violation = reproduce_sequence_counterexample(args.n, args.r)
        report = {"command": "repro", "example": "sequence-product", "n": args.n, "r": args.r,
                  "outcome": violation.outcome, "violation": violation.to_json()}
        lines = [f"Pointwise multiplication on R^N, n = {args.n}, r = {args.r:g}", report_text(violation)]
        return report, lines, EXIT_FAILS

    blowup = reproduce_smooth_blowup(args.k, args.t or DEFAULT_T_VALUES, settings)
    report = dict(command="repro", example="smooth-product", **blowup.to_json())
    lines = [f"g_t = t^{blowup.k} g((x - 1/2)/t), uniform bound S = {blowup.bound:.6g}"]
    for t, norm, ratio in zip(blowup.t_values, blowup.ck_norms, blowup.ratios):
        lines.append(f"  t = {t:.6g}: ||g_t||_C^{blowup.k} = {norm:.6g}, ratio = {ratio:.6g}")
    lines.append(f"  quotients: {', '.join(f'{q:.4f}' for q in blowup.quotients) or 'none'}")
    lines.append(f"bounded: {blowup.bounded}, blow-up: {blowup.blowup}")
    return report, lines, EXIT_FAILS if blowup.blowup and blowup.bounded else EXIT_UNKNOWN


def _group(kind: str, size: int):
    if kind == "cyclic":
        return CyclicZ(size)
    if kind == "truncated":
        return TruncatedZ(size)
    return CircleGrid(size)


def cmd_convolve(args: argparse.Namespace, settings: Settings) -> Tuple[Dict[str, Any], List[str], int]:
    G = _group(args.group, args.size)
    gamma = [float(v) for v in load_document(args.gamma)]
    eta = [float(v) for v in load_document(args.eta)]
    result = convolve(G, gamma, eta)
    measure = support_measure(G, gamma)
    lhs = float(max(abs(v) for v in result))
    rhs = max(abs(v) for v in gamma) * max(abs(v) for v in eta) * measure
    holds = settings.within_bound(lhs, rhs)
    report = {
        "command": "convolve",
        "group": args.group,
        "size": args.size,
        "result": [float(v) for v in result],
        "supportMeasure": measure,
        "supBound": {"lhs": lhs, "rhs": rhs, "holds": holds},
    }
    lines = [f"gamma * eta = {report['result']}",
             f"sup|gamma*eta| = {lhs:g} <= sup|gamma| sup|eta| |supp gamma| = {rhs:g}: {holds}"]
    return report, lines, EXIT_OK if holds else EXIT_FAILS


def cmd_theta(args: argparse.Namespace, settings: Settings) -> Tuple[Dict[str, Any], List[str], int]:
    M = BaseSpaceDesc.model_validate(load_document(args.base))
    value = theta(M)
    sigma = is_sigma_compact(M)
    report = {"command": "theta", "theta": value.to_json(), "sigmaCompact": sigma}
    return report, [f"theta(M) = {value}", f"sigma-compact: {sigma}"], EXIT_OK


def cmd_classify(args: argparse.Namespace, settings: Settings) -> Tuple[Dict[str, Any], List[str], int]:
    group = GroupClass(
        kind=GROUP_ARGS[args.group],
        countable=None if args.countable is None else Status.parse(args.countable) is Status.HOLDS,
        sigma_compact=None if args.sigma_compact is None else Status.parse(args.sigma_compact) is Status.HOLDS,
    )
    verdict = classify_convolution(group, args.r, args.s, args.t, args.b_pe)
    report = {
        "command": "classify-convolution",
        "group": args.group,
        "degrees": {"r": args.r, "s": args.s, "t": args.t},
        "continuous": verdict_to_json(verdict.continuous),
        "productEstimates": verdict_to_json(verdict.product_estimates),
    }
    lines = [f"C^{args.r}_c(G,E1) x C^{args.s}_c(G,E2) -> C^{args.t}_c(G,F) on a {args.group} group"]
    lines += _verdict_text("continuous", verdict.continuous)
    lines += _verdict_text("product estimates", verdict.product_estimates)
    statuses = (verdict.continuous.status, verdict.product_estimates.status)
    return report, lines, EXIT_UNKNOWN if Status.UNKNOWN in statuses else EXIT_OK


COMMANDS = {
    "derive": cmd_derive,
    "witness": cmd_witness,
    "falsify": cmd_falsify,
    "repro": cmd_repro,
    "convolve": cmd_convolve,
    "theta": cmd_theta,
    "classify-convolution": cmd_classify,
}


# --- parser and reports ----------------------------------------------------

def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Emit the machine-readable JSON report")
    common.add_argument("--seed", type=int, help="Seed for randomized checks (required for them)")
    common.add_argument("--config", help="Settings file in KEY=value form")
    common.add_argument("--log-level", choices=[level.value for level in LogLevel], default=None,
                        help="Log level for stderr (default from settings)")
    common.add_argument("--log-export", help="Write the buffered log records to this CSV file")

    parser = CliParser(
        prog="seminorm-lab",
        description="Neighbourhood properties, product estimates and their numerical checks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    verbs = parser.add_subparsers(dest="verb", required=True, parser_class=CliParser)

    derive_cmd = verbs.add_parser("derive", parents=[common], help="Decide a neighbourhood property")
    derive_cmd.add_argument("--space", required=True, help="Presentation document (file or inline JSON)")
    derive_cmd.add_argument("--property", default="cnp",
                            choices=[kind.value for kind in QueryKind] + ["product-estimates"])
    derive_cmd.add_argument("--theta", help="Cardinal for theta-np queries, e.g. aleph_1")
    derive_cmd.add_argument("--second", help="Second domain for product-estimates queries")
    derive_cmd.add_argument("--target", help="Target space for product-estimates queries")
    derive_cmd.add_argument("--base", help="Base space document; decides C^r_c(M) x E -> C^r_c(M,E)")
    derive_cmd.add_argument("--r", default="0", help="Smoothness degree with --base (integer or inf)")

    witness_cmd = verbs.add_parser("witness", parents=[common], help="Construct a product-estimate witness")
    witness_cmd.add_argument("--input", required=True, help="Construction document")

    falsify_cmd = verbs.add_parser("falsify", parents=[common], help="Search for violations of a candidate")
    falsify_cmd.add_argument("--input", required=True,
                             help="Model, targets and candidate families; \"search\": true adds hill climbing "
                                  "unless \"strategies\" leaves out hillClimb")

    repro_cmd = verbs.add_parser("repro", parents=[common], help="Reproduce a known counterexample")
    repro_cmd.add_argument("example", choices=["sequence-product", "smooth-product"])
    repro_cmd.add_argument("--n", type=int, help="Index n of the sequence counterexample")
    repro_cmd.add_argument("--r", type=float, default=1.0, help="Constant in p_1 <= r ||.||_n")
    repro_cmd.add_argument("--k", type=int, default=0, help="Order k of the smooth counterexample")
    repro_cmd.add_argument("--t", type=float, nargs="+", help="Strictly decreasing scales in (0, 1]")

    convolve_cmd = verbs.add_parser("convolve", parents=[common], help="Convolve on a finite group model")
    convolve_cmd.add_argument("--group", required=True, choices=["cyclic", "truncated", "circle"])
    convolve_cmd.add_argument("--size", required=True, type=int,
                              help="m for Z/mZ, the radius for the Z window, n for the circle grid")
    convolve_cmd.add_argument("--gamma", required=True, help="JSON array of samples")
    convolve_cmd.add_argument("--eta", required=True, help="JSON array of samples")

    theta_cmd = verbs.add_parser("theta", parents=[common], help="Compact covering number of a base space")
    theta_cmd.add_argument("--base", required=True, help="Base space document")

    classify_cmd = verbs.add_parser("classify-convolution", parents=[common],
                                    help="Continuity and product estimates of convolution")
    classify_cmd.add_argument("--group", required=True, choices=list(GROUP_ARGS))
    classify_cmd.add_argument("--r", required=True)
    classify_cmd.add_argument("--s", required=True)
    classify_cmd.add_argument("--t", required=True)
    classify_cmd.add_argument("--b-pe", required=True, help="Does b admit product estimates (yes/no/unknown)")
    classify_cmd.add_argument("--countable", help="yes/no, for infinite discrete groups")
    classify_cmd.add_argument("--sigma-compact", help="yes/no, for non-compact non-discrete groups")
    return parser


@lru_cache(maxsize=1)
def report_validator() -> Draft202012Validator:
    schema = json.loads((SCHEMA_DIR / "report-schema.json").read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def validate_report(report: Dict[str, Any]) -> None:
    errors = sorted(report_validator().iter_errors(report), key=lambda e: list(e.path))
    if errors:
        where = "/".join(str(p) for p in errors[0].path) or "<root>"
        raise ReportError(f"Report does not match the schema at {where}: {errors[0].message}")


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Run one verb and return its exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_INPUT
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)

    try:
        settings = load_settings(args.config)
        setup_logging(LogLevel(args.log_level) if args.log_level else settings.log_level)
        log_info(f"Running {args.verb}", LogCategory.CLI)
        report, lines, code = COMMANDS[args.verb](args, settings)
        validate_report(report)
    except UsageError as exc:
        print(f"seminorm-lab {args.verb}: {exc}", file=stderr)
        return EXIT_INPUT
    except ReportError as exc:
        log_error(str(exc), LogCategory.CLI)
        print(f"error: {exc}", file=stderr)
        return EXIT_SOFTWARE
    except (SeminormLabError, ValidationError, json.JSONDecodeError, TypeError, ValueError) as exc:
        log_error(f"{args.verb} rejected its input: {exc}", LogCategory.CLI)
        print(f"input error: {exc}", file=stderr)
        return EXIT_INPUT
    finally:
        if getattr(args, "log_export", None):
            Path(args.log_export).write_text(export_debug_logs(), encoding="utf-8")

    if args.json:
        print(json.dumps(report, indent=2, ensure_ascii=False), file=stdout)
    else:
        print("\n".join(lines), file=stdout)
    return code


def main() -> None:
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
