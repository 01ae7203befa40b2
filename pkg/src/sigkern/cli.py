"""Command-line interface.

    sigkern <command> --config <path> [--seed <u64>] [--output <path>] [--threads <n>]

Commands: synth (Brownian sequence CSV), gram (dual signature-kernel Gram),
features (primal signature features), mape (approximation error of a primal
method against the exact truncated kernel), bench (scalability sweep CSV),
classify (two-class drift experiment).

--seed and --output override the config keys of the same name. --threads
(or the SIGKERN_THREADS environment variable) sets worker threads; it is
not a config key because outputs must not depend on it.
"""

from __future__ import annotations

import argparse
import os
import sys

from .benchmarks import BenchSettings, ClassifySettings, mape as mape_metric, \
    run_bench, run_classify, write_bench_csv
from .config import COMMANDS, load_config
from .errors import ConfigError, ParseError, SigkernError
from .features import SigFeatureConfig, fit_sig_features, normalize_levels, \
    rfsf_exact_gram, sig_feature_gram, transform_sig_features
from .kernels import KernelConfig, sig_kernel_gram
from .preprocessing import tabulate
from .rng import SeedStream
from .sequences import _format_value, gen_brownian, load_sequences_csv, \
    write_matrix_csv, write_sequences_csv
from .static.features import StaticFeatureSpec
from .static.kernels import StaticKernelSpec, median_heuristic

__all__ = ["main"]

_MAPE_WIDTH_LIMIT = 200_000


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="sigkern",
        description="Signature kernels and random signature features for sequences.")
    parser.add_argument("command", choices=COMMANDS, help="what to run")
    parser.add_argument("--config", required=True, help="path to a key = value config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="root seed (unsigned 64-bit); overrides the config")
    parser.add_argument("--output", default=None, help="output CSV path; overrides the config")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: SIGKERN_THREADS or 1); "
                             "never changes the output bytes")
    return parser.parse_args(argv)


def _thread_count(flag) -> int:
    if flag is not None:
        n = flag
    else:
        env = os.environ.get("SIGKERN_THREADS", "").strip()
        if env:
            try:
                n = int(env)
            except ValueError:
                raise ConfigError(f"SIGKERN_THREADS: expected an integer, got {env!r}")
        else:
            n = 1
    if n < 1:
        raise ConfigError(f"threads: expected a positive integer, got {n}")
    return n


def _static_kernel_spec(cfg, batch_points) -> StaticKernelSpec:
    bw = cfg["kernel.static.bandwidth"]
    if bw == "median":
        bw = median_heuristic(batch_points)
    kwargs = dict(kind=cfg["kernel.static.kind"], bandwidth=bw)
    for name in ("scale", "degree", "gamma", "alpha"):
        key = f"kernel.static.{name}"
        if key in cfg:
            kwargs[name] = cfg[key]
    return StaticKernelSpec(**kwargs)


def _feature_config(cfg, batch_points) -> SigFeatureConfig:
    variant = cfg["features.variant"]
    kind = cfg["features.static.kind"]
    if kind is None:
        kind = "rff1d" if variant == "dp1d" else "rff"
    bw = cfg["features.static.bandwidth"]
    if bw == "median":
        bw = median_heuristic(batch_points)
    try:
        return SigFeatureConfig(
            variant=variant,
            static=StaticFeatureSpec(kind=kind, bandwidth=bw),
            n_components=cfg["features.n_components"],
            projection=cfg["features.projection"],
            n_levels=cfg["features.n_levels"],
            order=cfg["features.order"],
            difference=cfg["features.difference"],
            normalize=cfg["features.normalize"],
        )
    except ValueError as exc:
        raise ConfigError(f"features: {exc}") from exc


def _load_batch(cfg):
    seqs = load_sequences_csv(cfg["input"])
    return tabulate(seqs)


def _write_features_csv(path, ids, mat) -> None:
    header = "seq_id," + ",".join(f"f{j}" for j in range(mat.shape[1]))
    lines = [header]
    for i in range(mat.shape[0]):
        cells = [str(int(ids[i]))] + [_format_value(v) for v in mat[i]]
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_synth(cfg, seed, output, threads) -> None:
    drift = cfg["synth.drift"]
    dim = cfg["synth.dim"]
    if drift is not None and len(drift) not in (1, dim):
        raise ConfigError(
            f"synth.drift: expected 1 or synth.dim={dim} values, got {len(drift)}")
    batch = gen_brownian(cfg["synth.n"], cfg["synth.length"], dim,
                         seed.child("synth"), drift=drift)
    write_sequences_csv(output, batch)


def _cmd_gram(cfg, seed, output, threads) -> None:
    batch = _load_batch(cfg)
    kernel_cfg = KernelConfig(
        static=_static_kernel_spec(cfg, batch.points()),
        n_levels=cfg["kernel.n_levels"],
        order=cfg["kernel.order"],
        difference=cfg["kernel.difference"],
        normalization=cfg["kernel.normalization"],
    )
    K = sig_kernel_gram(batch, cfg=kernel_cfg, algorithm=cfg["kernel.algorithm"],
                        n_threads=threads)
    write_matrix_csv(output, K)


def _cmd_features(cfg, seed, output, threads) -> None:
    batch = _load_batch(cfg)
    fcfg = _feature_config(cfg, batch.points())
    state = fit_sig_features(fcfg, batch, seed.child("fit"))
    blocks = transform_sig_features(state, batch, n_threads=threads)
    mat = normalize_levels(blocks) if fcfg.normalize else blocks.concat()
    _write_features_csv(output, batch.ids, mat)


def _cmd_mape(cfg, seed, output, threads) -> None:
    data = gen_brownian(cfg["mape.n"], cfg["mape.length"], cfg["mape.dim"],
                        seed.child("data"))
    fcfg = _feature_config(cfg, data.points())
    state = fit_sig_features(fcfg, data, seed.child("fit"))
    width = sum(state.level_dims)
    lifted = cfg["mape.lifted"]
    if lifted and fcfg.variant != "rfsf_full":
        raise ConfigError(
            f"mape.lifted: requires features.variant = rfsf_full, got {fcfg.variant!r}")
    if lifted or (fcfg.variant == "rfsf_full" and width > _MAPE_WIDTH_LIMIT):
        approx_wide = rfsf_exact_gram(state, data, normalize=fcfg.normalize)
    else:
        approx_wide = None
    if lifted:
        if width > _MAPE_WIDTH_LIMIT:
            raise ConfigError(
                f"mape.lifted: materialized width {width} exceeds {_MAPE_WIDTH_LIMIT}")
        exact = approx_wide
        approx = sig_feature_gram(state, data, normalize=fcfg.normalize,
                                  n_threads=threads)
    else:
        kernel_cfg = KernelConfig(
            static=_static_kernel_spec(cfg, data.points()),
            n_levels=fcfg.n_levels,
            order=fcfg.order,
            difference=fcfg.difference,
            normalization="levelwise" if fcfg.normalize else "none",
        )
        exact = sig_kernel_gram(data, cfg=kernel_cfg, algorithm="dp", n_threads=threads)
        if approx_wide is not None:
            approx = approx_wide
        else:
            approx = sig_feature_gram(state, data, normalize=fcfg.normalize,
                                      n_threads=threads)
    value = mape_metric(exact, approx)
    with open(output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("mape\n" + _format_value(value) + "\n")
    print(f"mape={_format_value(value)}")


def _cmd_bench(cfg, seed, output, threads) -> None:
    settings = BenchSettings(
        methods=tuple(cfg["bench.methods"]),
        n_list=tuple(cfg["bench.n_list"]),
        l_list=tuple(cfg["bench.l_list"]),
        dq_list=tuple(cfg["bench.dq_list"]),
        m_list=tuple(cfg["bench.m_list"]),
        dim=cfg["bench.dim"],
        order=cfg["bench.order"],
        difference=cfg["bench.difference"],
        static_kind=cfg["kernel.static.kind"],
        bandwidth=cfg["kernel.static.bandwidth"],
        n_seeds=cfg["bench.n_seeds"],
        compute_mape=cfg["bench.mape"],
        wall_time=cfg["bench.wall_time"],
    )
    records = run_bench(settings, seed.child("bench"), n_threads=threads)
    write_bench_csv(output, records)


def _cmd_classify(cfg, seed, output, threads) -> None:
    settings = ClassifySettings(
        n_per_class=cfg["classify.n_per_class"],
        length=cfg["classify.length"],
        dim=cfg["classify.dim"],
        drift=cfg["classify.drift"],
        n_levels=cfg["classify.n_levels"],
        order=cfg["classify.order"],
        static_kind=cfg["kernel.static.kind"],
        bandwidth=cfg["kernel.static.bandwidth"],
        lambdas=tuple(cfg["classify.lambdas"]),
        n_folds=cfg["classify.n_folds"],
        n_seeds=cfg["classify.n_seeds"],
    )
    result = run_classify(settings, seed.child("classify"), n_threads=threads)
    lines = ["seed,best_lambda,accuracy"]
    for row in result["rows"]:
        lines.append(",".join([str(row["seed_index"]),
                               _format_value(row["best_lambda"]),
                               _format_value(row["accuracy"])]))
    with open(output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"median_accuracy={_format_value(result['median_accuracy'])}")


_DISPATCH = {
    "synth": _cmd_synth,
    "gram": _cmd_gram,
    "features": _cmd_features,
    "mape": _cmd_mape,
    "bench": _cmd_bench,
    "classify": _cmd_classify,
}


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        threads = _thread_count(args.threads)
        seed_value = args.seed if args.seed is not None else cfg["seed"]
        if not 0 <= seed_value < 2 ** 64:
            raise ConfigError(f"seed: expected an unsigned 64-bit integer, got {seed_value}")
        output = args.output if args.output is not None else cfg["output"]
        if output is None:
            output = f"sigkern_{args.command}.csv"
        _DISPATCH[args.command](cfg, SeedStream(seed_value), output, threads)
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SigkernError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
