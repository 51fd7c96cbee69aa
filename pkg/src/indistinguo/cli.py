"""Command-line surface for simulation, bounds, data analysis and recovery.

Subcommands
-----------
simulate
    Photon-counting distribution of a device + input scenario, with derived
    statistics (per-mode bunching, normalized variance, ratio to the
    distinguishable reference) and optional sampled counts.
bounds
    Indistinguishability witnesses computable from variance numbers alone.
analyze
    Ingest measured counts, undo detection efficiency, and estimate the
    variance, bunching probabilities, ratio and overlap bounds with
    bootstrap errors; or replay the bundled 23-device tables.
ensemble
    Statistics of a scenario across many random devices.
reconstruct
    Recover pairwise overlaps from variance observations, or a 3x3 device
    matrix from two-photon interference ratios.
phase-fit
    Recover the Gram-matrix phase from cyclic-device fringe counts.

Exit codes: 0 success, 2 malformed input, 3 invalid scenario,
4 recovery/estimation failure.  All outputs are deterministic for a fixed
``--seed`` and are written atomically.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bounds import (
    average_overlap_from_balanced,
    average_overlap_sdi_bound,
    min_overlap_lower_bounds,
    sigma_max,
)
from .errors import (
    CapacityError,
    DegenerateCaseError,
    DimensionError,
    EstimatorError,
    IdentifiabilityError,
    IndistinguoError,
    InputDataError,
    InvalidScenarioError,
    RangeError,
    ReconstructionError,
)
from .fileio import (
    atomic_write_text,
    config_key,
    parse_unitary_spec,
    read_counts_csv,
    read_cyclic_counts,
    read_detection_model,
    read_noise,
    read_ratio_observations,
    read_scenario,
    read_variance_observations,
    write_counts_csv,
    write_ensemble_csv,
    write_histogram_csv,
)
from .interference import (
    full_bunching_per_mode,
    full_bunching_probability,
    output_distribution,
    output_occupations,
    variance_distinguishable,
    variance_from_distribution,
)
from .montecarlo import bootstrap, run_haar_ensemble, sample_counts
from .noise import DetectionModel, correct_counts, noisy_distribution
from .reconstruct import (
    estimate_gram_phase_fit,
    reconstruct_overlaps,
    reconstruct_unitary,
)
from . import fixtures

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SCENARIO = 3
EXIT_SOLVER = 4

_HISTOGRAM_FIELDS = ("p_fb", "r_fb", "sigma", "sigma_d", "avg_overlap_lb")


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------


def parse_scenario_spec(text: str) -> np.ndarray:
    """Input-scenario Gram matrix from a JSON file or a named builder.

    Builders: ``ones:N`` (N identical photons), ``distinguishable:N``
    (N fully distinguishable photons), ``fixture:A|B|C`` (bundled measured
    scenarios).  Anything else must be an existing scenario JSON file.
    """
    import os

    if os.path.exists(text):
        return read_scenario(text)
    head, _, arg = text.strip().partition(":")
    head = head.lower()
    try:
        if head == "ones":
            n = int(arg)
            if n < 1:
                raise InputDataError(f"need at least one photon, got {n}")
            return np.ones((n, n), dtype=np.complex128)
        if head == "distinguishable":
            n = int(arg)
            if n < 1:
                raise InputDataError(f"need at least one photon, got {n}")
            return np.eye(n, dtype=np.complex128)
        if head == "fixture":
            key = arg.strip().upper()
            loader = {
                "A": fixtures.scenario_a,
                "B": fixtures.scenario_b,
                "C": fixtures.scenario_c,
            }.get(key)
            if loader is None:
                raise InputDataError(f"no bundled scenario named {arg!r}")
            return loader()
    except ValueError as exc:
        raise InputDataError(f"bad scenario spec {text!r}: {exc}") from exc
    raise InputDataError(
        f"scenario spec {text!r} is neither an existing file nor a known "
        "builder (ones:N, distinguishable:N, fixture:A|B|C)"
    )


def _parse_input_modes(text: str) -> tuple:
    try:
        modes = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputDataError(f"bad input-mode list {text!r}: {exc}") from exc
    if not modes or any(m < 0 for m in modes):
        raise InputDataError(f"bad input-mode list {text!r}")
    return modes


def _emit(payload, args) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _emit_csv(lines: list, args) -> None:
    text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _ideal_detection(modes: int, photons: int) -> DetectionModel:
    table = {c: 1.0 for c in output_occupations(modes, photons)}
    return DetectionModel(eta=1.0, table=table)


def _sibling_path(out: str, tag: str) -> str:
    stem, dot, ext = out.rpartition(".")
    if not dot:
        return f"{out}.{tag}"
    return f"{stem}.{tag}.{ext}" if ext == "csv" else f"{stem}.{tag}.csv"


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    u = parse_unitary_spec(args.unitary)
    gram = parse_scenario_spec(args.scenario)
    n = gram.shape[0]
    input_modes = (
        _parse_input_modes(args.input_modes)
        if args.input_modes
        else tuple(range(n))
    )
    noise = read_noise(args.noise) if args.noise else None
    reference = np.eye(n, dtype=np.complex128)
    if noise is None:
        dist = output_distribution(u, gram, input_modes)
        dist_d = output_distribution(u, reference, input_modes)
    else:
        dist = noisy_distribution(u, gram, noise, input_modes=input_modes)
        dist_d = noisy_distribution(u, reference, noise, input_modes=input_modes)

    per_mode = full_bunching_per_mode(dist)
    p_fb = float(full_bunching_probability(dist))
    p_fb_d = float(full_bunching_probability(dist_d))
    ratio = p_fb / p_fb_d if p_fb_d > 0.0 else None

    payload = {
        "command": "simulate",
        "unitary_spec": args.unitary,
        "scenario_spec": args.scenario,
        "input_modes": list(input_modes),
        "noisy": noise is not None,
        "seed": args.seed,
        "photons": dist.photons,
        "modes": dist.modes,
        "sigma": float(variance_from_distribution(dist)),
        "sigma_distinguishable": float(variance_from_distribution(dist_d)),
        "full_bunching": {
            "per_mode": [float(x) for x in per_mode],
            "total": p_fb,
            "distinguishable_total": p_fb_d,
            "ratio_vs_distinguishable": ratio,
        },
        "distribution": dist.to_json(),
    }

    if args.shots:
        counts = sample_counts(dist, args.shots, seed=args.seed)
        if args.out:
            counts_path = _sibling_path(args.out, "counts")
            write_counts_csv(counts_path, counts)
            payload["counts_path"] = counts_path
        else:
            payload["counts"] = {
                config_key(k): int(v) for k, v in sorted(counts.items())
            }

    if args.format == "csv":
        lines = ["config,probability"]
        for cfg, p in zip(dist.configs, dist.probs):
            lines.append(f"{config_key(cfg)},{float(p)!r}")
        _emit_csv(lines, args)
    else:
        _emit(payload, args)
    return EXIT_OK


def cmd_bounds(args) -> int:
    if args.format == "csv":
        raise InputDataError("the bounds command only writes JSON")
    linear, product = min_overlap_lower_bounds(args.sigma)
    payload = {
        "command": "bounds",
        "photons": args.photons,
        "sigma": args.sigma,
        "sigma_ceiling_balanced": sigma_max(args.photons),
        "min_overlap_linear": linear.to_json(),
        "min_overlap_product": product.to_json(),
    }
    if args.sigma_d is not None:
        payload["sigma_d"] = args.sigma_d
        payload["average_overlap_sdi"] = average_overlap_sdi_bound(
            args.sigma, args.sigma_d, args.photons
        ).to_json()
    else:
        payload["average_overlap_balanced"] = float(
            average_overlap_from_balanced(args.sigma, args.photons)
        )
    _emit(payload, args)
    return EXIT_OK


def _analyze_table(args) -> int:
    rows = fixtures.random_device_bunching(args.table)
    if args.device is not None:
        if not 1 <= args.device <= len(rows):
            raise InputDataError(
                f"device index {args.device} outside 1..{len(rows)}"
            )
        rows = [rows[args.device - 1]]
    if args.table.upper() == "A":
        prob_keys = ("p_300", "p_030", "p_003")
        ratio_keys = ("ratio_300", "ratio_030", "ratio_003")
    else:
        prob_keys = ("pt_200", "pt_020", "pt_002")
        ratio_keys = ("ratio_300", "ratio_030", "ratio_003")
    out_rows = []
    for row in rows:
        num = sum(row[k] for k in prob_keys)
        den = sum(row[p] / row[r] for p, r in zip(prob_keys, ratio_keys))
        est = num / den
        out_rows.append(
            {
                "device": row["device"],
                "r_fb_estimate": float(est),
                "r_fb_published": row["r_fb"],
                "r_fb_published_err": row["r_fb_err"],
                "within_published_error": bool(
                    abs(est - row["r_fb"]) <= row["r_fb_err"]
                ),
            }
        )
    if args.format == "csv":
        lines = [
            "device,r_fb_estimate,r_fb_published,r_fb_published_err,"
            "within_published_error"
        ]
        for r in out_rows:
            lines.append(
                f"{r['device']},{r['r_fb_estimate']!r},{r['r_fb_published']!r},"
                f"{r['r_fb_published_err']!r},{int(r['within_published_error'])}"
            )
        _emit_csv(lines, args)
    else:
        _emit(
            {"command": "analyze", "table": args.table.upper(), "rows": out_rows},
            args,
        )
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.table:
        return _analyze_table(args)
    if not args.counts:
        raise InputDataError("analyze needs --counts or --table")
    if args.format == "csv":
        raise InputDataError("counts analysis only writes JSON")

    raw = read_counts_csv(args.counts)
    first = next(iter(raw))
    modes, photons = len(first), sum(first)
    detection = (
        read_detection_model(args.detection)
        if args.detection
        else _ideal_detection(modes, photons)
    )

    def est_sigma(counts: dict) -> float:
        return variance_from_distribution(
            correct_counts(counts, detection).distribution
        )

    def est_pfb(counts: dict) -> float:
        return full_bunching_probability(
            correct_counts(counts, detection).distribution
        )

    corrected = correct_counts(raw, detection)
    sigma_boot = bootstrap(est_sigma, raw, resamples=args.resamples, seed=args.seed)
    pfb_boot = bootstrap(est_pfb, raw, resamples=args.resamples, seed=args.seed)
    sigma = float(est_sigma(raw))
    p_fb = float(est_pfb(raw))

    payload = {
        "command": "analyze",
        "photons": photons,
        "modes": modes,
        "resamples": args.resamples,
        "seed": args.seed,
        "sigma": {"value": sigma, "error": sigma_boot.std},
        "full_bunching": {
            "per_mode": [
                float(x) for x in full_bunching_per_mode(corrected.distribution)
            ],
            "total": p_fb,
            "total_error": pfb_boot.std,
        },
        "corrected": corrected.to_json(),
    }

    sigma_d = None
    p_fb_d = None
    p_fb_d_err = 0.0
    if args.reference_counts:
        ref_raw = read_counts_csv(args.reference_counts)
        ref = correct_counts(ref_raw, detection)
        sigma_d = float(variance_from_distribution(ref.distribution))
        sigma_d_err = bootstrap(
            est_sigma, ref_raw, resamples=args.resamples, seed=args.seed
        ).std
        p_fb_d = float(full_bunching_probability(ref.distribution))
        p_fb_d_err = bootstrap(
            est_pfb, ref_raw, resamples=args.resamples, seed=args.seed
        ).std
        payload["sigma_d"] = {"value": sigma_d, "error": sigma_d_err}
    elif args.unitary:
        u = parse_unitary_spec(args.unitary)
        if u.shape[0] != modes:
            raise DimensionError(
                f"unitary has {u.shape[0]} modes, counts have {modes}"
            )
        sigma_d = float(variance_distinguishable(u))
        dist_d = output_distribution(u, np.eye(photons), tuple(range(photons)))
        p_fb_d = float(full_bunching_probability(dist_d))
        payload["sigma_d"] = {"value": sigma_d, "error": 0.0}

    if p_fb_d is not None and p_fb_d > 0.0:
        r = p_fb / p_fb_d
        r_err = r * np.hypot(
            pfb_boot.std / p_fb if p_fb > 0 else 0.0,
            p_fb_d_err / p_fb_d,
        )
        payload["r_fb"] = {"value": float(r), "error": float(r_err)}

    linear, product = min_overlap_lower_bounds(sigma)
    bounds = {
        "min_overlap_linear": linear.to_json(),
        "min_overlap_product": product.to_json(),
    }
    if sigma_d is not None:
        bounds["average_overlap_sdi"] = average_overlap_sdi_bound(
            sigma, sigma_d, photons
        ).to_json()
    payload["bounds"] = bounds

    _emit(payload, args)
    return EXIT_OK


def cmd_ensemble(args) -> int:
    gram = parse_scenario_spec(args.scenario)
    noise = read_noise(args.noise) if args.noise else None
    result = run_haar_ensemble(
        args.modes, gram, args.draws, seed=args.seed, noise=noise
    )
    payload = {
        "command": "ensemble",
        "scenario_spec": args.scenario,
        "noise": args.noise,
        **result.summary(),
    }
    if args.out:
        draws_path = _sibling_path(args.out, "draws")
        hist_path = _sibling_path(args.out, "hist")
        write_ensemble_csv(draws_path, result)
        write_histogram_csv(hist_path, getattr(result, args.histogram), args.bins)
        payload["draws_path"] = draws_path
        payload["histogram_path"] = hist_path
        payload["histogram_field"] = args.histogram
    _emit(payload, args)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    if args.format == "csv":
        raise InputDataError("the reconstruct command only writes JSON")
    if bool(args.variances) == bool(args.ratios):
        raise InputDataError(
            "reconstruct needs exactly one of --variances or --ratios"
        )
    if args.variances:
        if not args.moduli:
            raise InputDataError("--variances needs the matching --moduli file")
        observations = read_variance_observations(args.variances, args.moduli)
        estimate = reconstruct_overlaps(
            observations,
            n=args.photons,
            resamples=args.resamples,
            seed=args.seed,
        )
        payload = {"command": "reconstruct", "kind": "overlaps", **estimate.to_json()}
    else:
        if args.overlap is None:
            raise InputDataError("--ratios needs --overlap (two-photon overlap)")
        observations = read_ratio_observations(args.ratios)
        reference = (
            parse_unitary_spec(args.reference) if args.reference else None
        )
        result = reconstruct_unitary(
            observations,
            args.overlap,
            restarts=args.restarts,
            seed=args.seed,
            reference=reference,
            max_evaluations=args.max_evaluations,
        )
        payload = {"command": "reconstruct", "kind": "unitary", **result.to_json()}
    _emit(payload, args)
    return EXIT_OK


def cmd_phase_fit(args) -> int:
    if args.format == "csv":
        raise InputDataError("the phase-fit command only writes JSON")
    alphas, plus, minus = read_cyclic_counts(args.counts)
    estimate = estimate_gram_phase_fit(alphas, plus, minus)
    payload = {
        "command": "phase-fit",
        "settings": len(alphas),
        **estimate.to_json(),
    }
    _emit(payload, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="indistinguo",
        description=(
            "Simulate multiphoton interference with partially "
            "distinguishable photons and characterize devices and states "
            "from counting statistics."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seeded=True):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument(
            "--format", choices=("json", "csv"), default="json",
            help="output format where supported (default json)",
        )
        if seeded:
            p.add_argument("--seed", type=int, default=0, help="RNG seed")

    p = sub.add_parser(
        "simulate", help="exact or noisy counting distribution of one device"
    )
    p.add_argument("--unitary", required=True,
                   help="device: fourier:N, cyclic:alpha=X, identity:N, "
                        "haar:N[:seed=K], or a matrix JSON file")
    p.add_argument("--scenario", required=True,
                   help="input scenario: JSON file, ones:N, "
                        "distinguishable:N, or fixture:A|B|C")
    p.add_argument("--input-modes",
                   help="comma-separated injection modes (default 0..n-1)")
    p.add_argument("--noise", help="noise parameter JSON file")
    p.add_argument("--shots", type=int,
                   help="also sample this many detection events")
    common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser(
        "bounds", help="overlap bounds from variance numbers alone"
    )
    p.add_argument("--sigma", type=float, required=True,
                   help="measured normalized variance")
    p.add_argument("--sigma-d", type=float, dest="sigma_d",
                   help="variance with distinguishable photons "
                        "(enables the interferometer-independent bound)")
    p.add_argument("--photons", type=int, default=3, help="photon number")
    common(p, seeded=False)
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser(
        "analyze", help="estimates with errors from measured counts"
    )
    p.add_argument("--counts", help="counts CSV (config,count)")
    p.add_argument("--table", choices=("A", "C", "a", "c"),
                   help="replay a bundled 23-device table instead of counts")
    p.add_argument("--device", type=int,
                   help="restrict --table to one device (1-based)")
    p.add_argument("--detection",
                   help="detection model JSON (default: ideal counters)")
    p.add_argument("--reference-counts", dest="reference_counts",
                   help="counts CSV measured with distinguishable photons")
    p.add_argument("--unitary",
                   help="device spec for the distinguishable reference "
                        "when no reference counts exist")
    p.add_argument("--resamples", type=int, default=1000,
                   help="bootstrap resamples (default 1000)")
    common(p)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser(
        "ensemble", help="scenario statistics across random devices"
    )
    p.add_argument("--scenario", required=True,
                   help="input scenario: JSON file, ones:N, "
                        "distinguishable:N, or fixture:A|B|C")
    p.add_argument("--modes", type=int, default=3, help="interferometer size")
    p.add_argument("--draws", type=int, default=1000,
                   help="number of random devices (default 1000)")
    p.add_argument("--noise", help="noise parameter JSON file")
    p.add_argument("--histogram", choices=_HISTOGRAM_FIELDS,
                   default="avg_overlap_lb",
                   help="per-draw series written as a histogram CSV "
                        "next to --out")
    p.add_argument("--bins", type=int, default=40, help="histogram bins")
    common(p)
    p.set_defaults(handler=cmd_ensemble)

    p = sub.add_parser(
        "reconstruct",
        help="overlaps from variance data, or a 3x3 device from ratio data",
    )
    p.add_argument("--variances",
                   help="variance observations CSV (unitary_id,sigma,sigma_var)")
    p.add_argument("--moduli",
                   help="JSON file mapping unitary_id to squared-moduli rows")
    p.add_argument("--photons", type=int, default=3, help="photon number")
    p.add_argument("--resamples", type=int, default=1000,
                   help="bootstrap resamples for overlap errors")
    p.add_argument("--ratios", help="two-photon ratio CSV (m,n,i,j,R,err)")
    p.add_argument("--overlap", type=float,
                   help="measured two-photon overlap for the ratio model")
    p.add_argument("--restarts", type=int, default=100,
                   help="random restarts for the device fit")
    p.add_argument("--max-evaluations", type=int, dest="max_evaluations",
                   help="cap on residual evaluations per restart")
    p.add_argument("--reference",
                   help="device spec to compare the reconstruction against")
    common(p)
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser(
        "phase-fit", help="Gram phase from cyclic-device fringe counts"
    )
    p.add_argument("--counts", required=True,
                   help="cyclic counts CSV (alpha,set,counts)")
    common(p, seeded=False)
    p.set_defaults(handler=cmd_phase_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (InputDataError, DimensionError, CapacityError, RangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (
        IdentifiabilityError,
        ReconstructionError,
        EstimatorError,
        DegenerateCaseError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IndistinguoError as exc:  # any remaining library error
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
