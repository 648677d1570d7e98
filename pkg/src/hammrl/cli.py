"""Batch pipeline: dataset generation, mitigation, and rank evaluation.

Commands:

* ``generate``: simulate every secret at a fixed width/ones count and write
  one counts JSON per circuit plus a dataset manifest.
* ``mitigate``: run one method on one counts file.
* ``evaluate``: run methods over a manifest's circuits and write rank
  tables (records.csv, summary.csv, report.json).
* ``compare``: evaluate across several manifests, adding grand-mean rows.

Exit codes: 0 success, 1 runtime failure, 2 invalid usage or input.
Flags override ``--config`` values, which override built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path
from statistics import fmean
from typing import Mapping

from . import _jsontext, evaluation
from .baselines import PoissonBaselineConfig, hammer_mitigate, poisson_mitigate
from .deconv import DeconvolutionConfig, PointSpreadFunction, richardson_lucy
from .distribution import CountsMap, ProbDistribution, from_counts
from .errors import CapacityError, HammrlError, InvalidInputError
from .simulator import (
    DatasetSpec,
    NoiseModel,
    counts_filename,
    dataset_label,
    generate_dataset,
    load_manifest,
    manifest_dict,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

METHOD_LABELS = {
    "hammr-l": "hammr-l",
    "hammer": "hammer",
    "poisson": "poisson [QBEEP-style (simplified)]",
    "identity": "identity",
}

_GENERATE_KEYS = frozenset(
    {"shots", "seed", "base_flip", "per_cnot_flip", "p01", "p10"}
)
_METHOD_KEYS = frozenset(
    {"psf", "iterations", "tolerance", "distance_cutoff", "exclude_self", "lam"}
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hammrl",
        description="Measurement-error mitigation over Hamming state graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate a fixed-ones-count dataset")
    g.add_argument("--qubits", type=int, required=True)
    g.add_argument("--ones", type=int, required=True)
    g.add_argument("--shots", type=int, default=None)
    g.add_argument("--seed", type=int, default=None, help="master sampling seed")
    g.add_argument("--base-flip", type=float, default=None,
                   help="flip probability independent of circuit size")
    g.add_argument("--per-cnot-flip", type=float, default=None,
                   help="additional flip probability per CNOT")
    g.add_argument("--p01", type=float, default=None,
                   help="asymmetric 0->1 flip probability (overrides base/per-cnot)")
    g.add_argument("--p10", type=float, default=None,
                   help="asymmetric 1->0 flip probability")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--config", default=None)
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("mitigate", help="mitigate one counts file")
    m.add_argument("--input", required=True, help="counts JSON file")
    m.add_argument("--method", choices=sorted(METHOD_LABELS), default=None)
    _add_method_args(m)
    m.add_argument("--out", default=None, help="output JSON (default: stdout)")
    m.add_argument("--plot", action="store_true", default=None,
                   help="also write top-outcome bar data next to --out")
    m.add_argument("--config", default=None)
    m.set_defaults(func=cmd_mitigate)

    e = sub.add_parser("evaluate", help="rank evaluation over one manifest")
    e.add_argument("--manifest", required=True)
    e.add_argument("--methods", default=None,
                   help="comma-separated subset of: " + ",".join(sorted(METHOD_LABELS)))
    e.add_argument("--label", default=None, help="dataset label override")
    _add_method_args(e)
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--plot", action="store_true", default=None,
                   help="also write rank histogram data")
    e.add_argument("--config", default=None)
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("compare", help="rank evaluation across manifests")
    c.add_argument("--manifests", nargs="+", required=True)
    c.add_argument("--methods", default=None)
    c.add_argument("--labels", default=None,
                   help="comma-separated dataset label overrides")
    _add_method_args(c)
    c.add_argument("--out", required=True, help="output directory")
    c.add_argument("--plot", action="store_true", default=None)
    c.add_argument("--config", default=None)
    c.set_defaults(func=cmd_compare)

    return parser


def _add_method_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--psf", default=None,
                     help="point spread: reciprocal | poisson:L | "
                          "binomial:N:P | table:w0,w1,...")
    sub.add_argument("--iterations", type=int, default=None)
    sub.add_argument("--tolerance", type=float, default=None)
    sub.add_argument("--distance-cutoff", type=int, default=None)
    sub.add_argument("--exclude-self", action="store_true", default=None,
                     help="drop the distance-0 term from the deconvolution sums")
    sub.add_argument("--lambda", type=float, default=None, dest="lam",
                     help="expected flipped bits per shot (poisson method)")


def _load_config(path, allowed: frozenset[str]) -> dict:
    if path is None:
        return {}
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict):
        raise InvalidInputError("config file must be a JSON object")
    for key in obj:
        if key not in allowed:
            raise InvalidInputError(f"config file has unknown field '{key}'")
    return obj


def _resolve(cli_value, config: Mapping, key: str, default):
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return default


# ---------------------------------------------------------------------------
# generate


def generate_params(args) -> dict:
    config = _load_config(args.config, _GENERATE_KEYS)
    params = {
        "qubits": args.qubits,
        "ones": args.ones,
        "shots": _resolve(args.shots, config, "shots", None),
        "seed": int(_resolve(args.seed, config, "seed", 0)),
        "base_flip": float(_resolve(args.base_flip, config, "base_flip", 0.0)),
        "per_cnot_flip": float(
            _resolve(args.per_cnot_flip, config, "per_cnot_flip", 0.0)
        ),
        "p01": _resolve(args.p01, config, "p01", None),
        "p10": _resolve(args.p10, config, "p10", None),
        "out": args.out,
    }
    if params["shots"] is not None:
        params["shots"] = int(params["shots"])
    if (params["p01"] is None) != (params["p10"] is None):
        raise InvalidInputError("--p01 and --p10 must be given together")
    return params


def cmd_generate(args) -> int:
    params = generate_params(args)
    asymmetry = None
    if params["p01"] is not None:
        asymmetry = (float(params["p01"]), float(params["p10"]))
    noise = NoiseModel(
        base_flip_prob=params["base_flip"],
        per_cnot_flip_prob=params["per_cnot_flip"],
        asymmetry=asymmetry,
        seed=params["seed"],
    )
    spec_kwargs = dict(n_qubits=params["qubits"], ones_count=params["ones"],
                       noise=noise)
    if params["shots"] is not None:
        spec_kwargs["shots"] = params["shots"]
    spec = DatasetSpec(**spec_kwargs)
    dataset = generate_dataset(spec)  # fully computed before any write

    out_dir = Path(params["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    for _, counts in dataset:
        counts.save(out_dir / counts_filename(counts.secret))
    _jsontext.dump(out_dir / "manifest.json", manifest_dict(spec))
    print(f"wrote {len(dataset)} circuits and manifest.json to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# mitigation methods


def method_params(args, config: Mapping) -> dict:
    return {
        "psf": _resolve(args.psf, config, "psf", "reciprocal"),
        "iterations": int(_resolve(args.iterations, config, "iterations",
                                   DeconvolutionConfig().max_iterations)),
        "tolerance": float(_resolve(args.tolerance, config, "tolerance",
                                    DeconvolutionConfig().convergence_tol)),
        "distance_cutoff": _resolve(args.distance_cutoff, config,
                                    "distance_cutoff", None),
        "exclude_self": bool(_resolve(args.exclude_self, config,
                                      "exclude_self", False)),
        "lam": _resolve(args.lam, config, "lam", None),
    }


def _deconv_config(params) -> DeconvolutionConfig:
    cutoff = params["distance_cutoff"]
    return DeconvolutionConfig(
        max_iterations=params["iterations"],
        convergence_tol=params["tolerance"],
        distance_cutoff=None if cutoff is None else int(cutoff),
        include_self=not params["exclude_self"],
    )


def build_mitigator(method: str, params: Mapping, default_lam: float | None = None):
    """Return (report label, callable distribution -> distribution)."""
    if method not in METHOD_LABELS:
        raise InvalidInputError(
            f"unknown method {method!r}; expected one of {sorted(METHOD_LABELS)}"
        )
    label = METHOD_LABELS[method]
    if method == "hammr-l":
        psf = PointSpreadFunction.from_spec(params["psf"])
        config = _deconv_config(params)
        return label, lambda dist: richardson_lucy(dist, psf, config).mitigated
    if method == "hammer":
        return label, hammer_mitigate
    if method == "poisson":
        lam = params["lam"] if params["lam"] is not None else default_lam
        if lam is None or float(lam) <= 0.0:
            raise InvalidInputError(
                "the poisson method needs --lambda > 0 (no usable default here)"
            )
        poisson_config = PoissonBaselineConfig(float(lam))
        return label, lambda dist: poisson_mitigate(dist, poisson_config)
    return label, lambda dist: dist


def expected_flip_count(noise: NoiseModel, n_qubits: int, ones_count: int) -> float:
    """Expected flipped bits per shot; the poisson method's default lambda."""
    if noise.asymmetry is not None:
        p01, p10 = noise.asymmetry
        return (n_qubits - ones_count) * p01 + ones_count * p10
    return n_qubits * noise.effective_flip_prob(ones_count)


# ---------------------------------------------------------------------------
# mitigate


def mitigate_params(args) -> dict:
    config = _load_config(args.config, _METHOD_KEYS | {"method"})
    params = method_params(args, config)
    params.update({
        "input": args.input,
        "method": _resolve(args.method, config, "method", "hammr-l"),
        "out": args.out,
        "plot": bool(args.plot),
    })
    return params


def cmd_mitigate(args) -> int:
    params = mitigate_params(args)
    if params["plot"] and params["out"] is None:
        raise InvalidInputError("--plot needs --out to name its CSV file")
    counts = CountsMap.load(params["input"])
    before = from_counts(counts)

    method = params["method"]
    payload: dict = {"method": METHOD_LABELS.get(method, method)}
    if counts.label is not None:
        payload["label"] = counts.label
    if counts.secret is not None:
        payload["secret"] = counts.secret

    if method == "hammr-l":
        psf = PointSpreadFunction.from_spec(params["psf"])
        result = richardson_lucy(before, psf, _deconv_config(params))
        after = result.mitigated
        payload["mitigated"] = after.to_json_dict()
        payload["iterations_run"] = result.iterations_run
        payload["converged"] = result.converged
        payload["l1_history"] = result.l1_history
    else:
        _, mitigate = build_mitigator(method, params)
        after = mitigate(before)
        payload["mitigated"] = after.to_json_dict()

    text = _jsontext.dumps(payload)
    if params["out"] is None:
        sys.stdout.write(text)
    else:
        out_path = Path(params["out"])
        if out_path.parent != Path(""):
            out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8")
        print(f"wrote {out_path}")
        if params["plot"]:
            plot_path = out_path.with_name(out_path.stem + "_topk.csv")
            _write_topk_csv(plot_path, before, after)
            print(f"wrote {plot_path}")
    return EXIT_OK


def _write_topk_csv(path, before: ProbDistribution, after: ProbDistribution,
                    k: int = 10) -> None:
    """Bar-chart data: the top outcomes after mitigation, with both masses."""
    ranked = sorted(after.probs, key=lambda key: (-after.probs[key], key))[:k]
    lines = ["outcome,prob_before,prob_after"]
    for key in ranked:
        lines.append(
            f"{key},{_jsontext.format_float(before.get(key))},"
            f"{_jsontext.format_float(after.get(key))}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# evaluate / compare


def _parse_methods(text: str | None) -> list[str]:
    names = [m.strip() for m in (text or "hammr-l").split(",") if m.strip()]
    if not names:
        raise InvalidInputError("--methods must name at least one method")
    seen = set()
    unique = []
    for name in names:
        if name not in METHOD_LABELS:
            raise InvalidInputError(
                f"unknown method {name!r}; expected one of {sorted(METHOD_LABELS)}"
            )
        if name not in seen:
            seen.add(name)
            unique.append(name)
    return unique


def _load_dataset(manifest_path) -> tuple[str, dict, list[tuple[str, ProbDistribution]]]:
    manifest = load_manifest(manifest_path)
    label = dataset_label(manifest["n_qubits"], manifest["ones_count"])
    base = Path(manifest_path).parent
    circuits: list[tuple[str, ProbDistribution]] = []
    for name in manifest["circuits"]:
        cm = CountsMap.load(base / name)
        if cm.secret is None:
            raise InvalidInputError(
                f"counts file {name} is missing field 'secret'; "
                "rank evaluation needs the correct outcome"
            )
        circuits.append((cm.secret, from_counts(cm)))
    return label, manifest, circuits


def evaluate_params(args) -> dict:
    config = _load_config(args.config, _METHOD_KEYS | {"methods"})
    params = method_params(args, config)
    params.update({
        "manifest": args.manifest,
        "methods": tuple(_parse_methods(
            _resolve(args.methods, config, "methods", None))),
        "label": args.label,
        "out": args.out,
        "plot": bool(args.plot),
    })
    return params


def compare_params(args) -> dict:
    config = _load_config(args.config, _METHOD_KEYS | {"methods"})
    params = method_params(args, config)
    labels = None
    if args.labels is not None:
        labels = tuple(s.strip() for s in args.labels.split(","))
    params.update({
        "manifests": tuple(args.manifests),
        "methods": tuple(_parse_methods(
            _resolve(args.methods, config, "methods", None))),
        "labels": labels,
        "out": args.out,
        "plot": bool(args.plot),
    })
    return params


def _run_rank_tables(manifest_paths, label_overrides, params,
                     include_grand_rows: bool):
    """Shared evaluate/compare core; returns (reports, grand_means)."""
    if label_overrides is not None and len(label_overrides) != len(manifest_paths):
        raise InvalidInputError("--labels must match the number of manifests")

    datasets: dict[str, list] = {}
    lam_defaults: dict[str, float] = {}
    for idx, path in enumerate(manifest_paths):
        label, manifest, circuits = _load_dataset(path)
        if label_overrides is not None:
            label = label_overrides[idx]
        base_label, bump = label, 2
        while label in datasets:  # same (n, ones) twice: disambiguate
            label = f"{base_label}-{bump}"
            bump += 1
        datasets[label] = circuits
        noise = NoiseModel.from_json_dict(manifest["noise"])
        lam_defaults[label] = expected_flip_count(
            noise, manifest["n_qubits"], manifest["ones_count"]
        )

    method_ids = params["methods"]
    lam_values = set(lam_defaults.values())
    if params["lam"] is None and "poisson" in method_ids and len(lam_values) > 1:
        # Different noise per dataset: the poisson default lambda differs,
        # so run each dataset with its own method map, then merge in
        # method-major order and apply the same grand-mean formula.
        reports = []
        for label, circuits in datasets.items():
            methods = {}
            for m in method_ids:
                report_label, fn = build_mitigator(m, params, lam_defaults[label])
                methods[report_label] = fn
            sub_reports, _ = evaluation.compare_methods({label: circuits}, methods)
            reports.extend(sub_reports)
        grand = {
            METHOD_LABELS[m]: fmean(
                r.mean_rank_change for r in reports if r.method == METHOD_LABELS[m]
            )
            for m in method_ids
        }
        method_order = {METHOD_LABELS[m]: i for i, m in enumerate(method_ids)}
        label_order = {label: i for i, label in enumerate(datasets)}
        reports.sort(key=lambda r: (method_order[r.method], label_order[r.dataset]))
    else:
        default_lam = next(iter(lam_values)) if len(lam_values) == 1 else None
        methods = {}
        for m in method_ids:
            report_label, fn = build_mitigator(m, params, default_lam)
            methods[report_label] = fn
        reports, grand = evaluation.compare_methods(datasets, methods)

    return reports, (grand if include_grand_rows else None), grand


def _write_rank_outputs(out_dir: Path, reports, grand_for_csv, grand_for_json,
                        plot: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    evaluation.write_records_csv(out_dir / "records.csv", reports)
    evaluation.write_summary_csv(out_dir / "summary.csv", reports, grand_for_csv)
    evaluation.write_report_json(out_dir / "report.json", reports, grand_for_json)
    if plot:
        _write_rank_histogram(out_dir / "rank_histogram.csv", reports)
    for line in evaluation.summary_csv_lines(reports, grand_for_csv):
        print(line)


def _write_rank_histogram(path, reports) -> None:
    lines = ["method,dataset,stage,rank,count"]
    for report in reports:
        for stage, pick in (("before", lambda r: r.rank_before),
                            ("after", lambda r: r.rank_after)):
            hist = Counter(pick(rec) for rec in report.records)
            for rank in sorted(hist):
                lines.append(
                    f"{report.method},{report.dataset},{stage},{rank},{hist[rank]}"
                )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_evaluate(args) -> int:
    params = evaluate_params(args)
    overrides = (params["label"],) if params["label"] is not None else None
    reports, _, grand = _run_rank_tables(
        (params["manifest"],), overrides, params, include_grand_rows=False
    )
    _write_rank_outputs(Path(params["out"]), reports, None, grand, params["plot"])
    return EXIT_OK


def cmd_compare(args) -> int:
    params = compare_params(args)
    reports, grand_rows, grand = _run_rank_tables(
        params["manifests"], params["labels"], params, include_grand_rows=True
    )
    _write_rank_outputs(Path(params["out"]), reports, grand_rows, grand,
                        params["plot"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# invocation rendering (config round-trip support)


def render_invocation(command: str, params: Mapping) -> list[str]:
    """Render a resolved parameter set back into an equivalent argv."""
    argv = [command]

    def flag(name, value):
        argv.extend([name, str(value)])

    if command == "generate":
        flag("--qubits", params["qubits"])
        flag("--ones", params["ones"])
        if params["shots"] is not None:
            flag("--shots", params["shots"])
        flag("--seed", params["seed"])
        flag("--base-flip", repr(params["base_flip"]))
        flag("--per-cnot-flip", repr(params["per_cnot_flip"]))
        if params["p01"] is not None:
            flag("--p01", repr(float(params["p01"])))
            flag("--p10", repr(float(params["p10"])))
        flag("--out", params["out"])
        return argv

    def method_flags():
        flag("--psf", params["psf"])
        flag("--iterations", params["iterations"])
        flag("--tolerance", repr(params["tolerance"]))
        if params["distance_cutoff"] is not None:
            flag("--distance-cutoff", params["distance_cutoff"])
        if params["exclude_self"]:
            argv.append("--exclude-self")
        if params["lam"] is not None:
            flag("--lambda", repr(float(params["lam"])))

    if command == "mitigate":
        flag("--input", params["input"])
        flag("--method", params["method"])
        method_flags()
        if params["out"] is not None:
            flag("--out", params["out"])
        if params["plot"]:
            argv.append("--plot")
        return argv

    if command == "evaluate":
        flag("--manifest", params["manifest"])
        flag("--methods", ",".join(params["methods"]))
        if params["label"] is not None:
            flag("--label", params["label"])
        method_flags()
        flag("--out", params["out"])
        if params["plot"]:
            argv.append("--plot")
        return argv

    if command == "compare":
        argv.append("--manifests")
        argv.extend(params["manifests"])
        flag("--methods", ",".join(params["methods"]))
        if params["labels"] is not None:
            flag("--labels", ",".join(params["labels"]))
        method_flags()
        flag("--out", params["out"])
        if params["plot"]:
            argv.append("--plot")
        return argv

    raise InvalidInputError(f"unknown command {command!r}")


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInputError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HammrlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
