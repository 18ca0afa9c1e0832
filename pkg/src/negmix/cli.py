"""Command-line interface.

Exit codes: 0 success, 1 numerical failure, 2 usage or I/O error.
All randomness derives from ``--seed``; reruns give byte-identical files.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import experiments, gaussian, wfa
from .exceptions import FitError, NegMixError
from .estimator import TensorPowerDecomposition
from .tensor import tensor_from_json

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- I/O -----------------------------------------------------------------


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt(x):
    return repr(float(x))


def _csv_text(rows, header=None):
    lines = []
    if header:
        lines.append(",".join(header))
    lines.extend(",".join(v if isinstance(v, str) else _fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def read_dataset(path, header=False):
    try:
        X = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"{path} is not a numeric CSV: {exc}") from None
    return X


def _load_model(path, strict=True):
    try:
        return gaussian.SphericalMixture.from_json(_read_json(path), strict=strict)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid model file {path}: {exc}") from None


def _load_rep(path):
    try:
        return wfa.LinearRep.from_json(_read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid WFA file {path}: {exc}") from None


def _load_tensor(path, order):
    try:
        T = tensor_from_json(_read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid tensor file {path}: {exc}") from None
    if T.ndim != order:
        raise UsageError(f"{path} holds an order-{T.ndim} tensor, expected order {order}")
    return np.real_if_close(T)


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join(missing))


# -- commands ------------------------------------------------------------


def cmd_sample(args):
    _require(args, "model", "N")
    model = _load_model(args.model)
    res = gaussian.sample_mixture(model, args.N, seed=args.seed)
    header = [f"x{i}" for i in range(model.n)] if args.header else None
    _write_text(args.out, _csv_text(res.samples, header))
    print(f"acceptance rate {res.acceptance_rate:.6f} ({len(res.samples)} of {res.n_proposed} proposals)",
          file=sys.stderr if args.out in (None, "-") else sys.stdout)


def _trace_rows(result):
    for c in result.candidates:
        rep = c.report
        yield [
            str(c.index),
            _fmt(c.eigenvalue),
            "" if c.log_likelihood is None else _fmt(c.log_likelihood),
            "" if c.score is None else _fmt(c.score),
            "" if rep is None else _fmt(rep.imag_residue),
            "" if rep is None else ";".join(str(i) for i in rep.iterations),
            "1" if c.index == result.candidate_index else "0",
            (c.error or "").replace(",", ";"),
        ]


def cmd_fit(args):
    _require(args, "data", "k")
    X = read_dataset(args.data, header=args.header)
    if args.k > X.shape[1]:
        raise UsageError(f"--k {args.k} exceeds the data dimension {X.shape[1]}")
    try:
        res = gaussian.fit(
            X, args.k, restarts=args.restarts, seed=args.seed, tol=args.tol, rank_tol=args.rank_tol,
            imag_tol=args.imag_tol,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write_text(args.out, _dump_json(res.model.to_json()))
    if args.trace:
        header = ["candidate", "eigenvalue", "log_likelihood", "score", "imag_residue", "iterations", "chosen",
                  "error"]
        _write_text(args.trace, _csv_text(_trace_rows(res), header))
    rep = res.best.report
    if args.out not in (None, "-"):
        print(f"chosen candidate {res.candidate_index} (average variance {res.best.eigenvalue:.6g}); "
              f"sum of weights {rep.weight_sum:.6g}; imag residue {rep.imag_residue:.3g}")


def cmd_decompose(args):
    _require(args, "m2", "m3", "k")
    M2, M3 = _load_tensor(args.m2, 2), _load_tensor(args.m3, 3)
    if np.iscomplexobj(M2) or np.iscomplexobj(M3):
        raise UsageError("moment tensors must be real")
    est = TensorPowerDecomposition(args.k, restarts=args.restarts, random_state=args.seed, tol=args.tol,
                                   rank_tol=args.rank_tol, imag_tol=args.imag_tol)
    try:
        est.fit(M2, M3)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def enc(x):
        x = np.asarray(x)
        return np.stack([x.real, x.imag], axis=-1).tolist() if np.iscomplexobj(x) else x.tolist()

    out = {
        "k": args.k,
        "components": [
            {"weight": enc(c.weight), "mean": enc(c.mean), "imag_residue": c.imag_residue, "complex": c.is_complex}
            for c in est.components_
        ],
        "iterations": est.n_iter_,
    }
    _write_text(args.out, _dump_json(out))


def cmd_wfa(args):
    _require(args, "wfa")
    rep = _load_rep(args.wfa)
    action = args.action
    if action == "split":
        plus, minus = wfa.split_difference(rep)
        _write_text(args.out, _dump_json({"plus": plus.to_json(), "minus": minus.to_json()}))
    elif action == "normalize":
        pa = wfa.normalize_to_pa(wfa.trim(rep))
        _write_text(args.out, _dump_json(pa.to_json()))
    elif action == "mixture":
        try:
            mix = wfa.to_pa_mixture(rep, assume_distribution=not args.no_check)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _write_text(args.out, _dump_json(mix.to_json()))
        if args.out not in (None, "-"):
            print(f"s_plus {mix.s_plus:.6f} s_minus {mix.s_minus:.6f}")
    elif action == "sum":
        _write_text(args.out, _fmt(wfa.series_sum(rep)) + "\n")
    elif action == "eval":
        if args.word is not None:
            word = args.word.split() if " " in args.word else args.word
            try:
                val = wfa.eval_word(rep, word)
            except KeyError as exc:
                raise UsageError(str(exc.args[0])) from None
            _write_text(args.out, _fmt(val) + "\n")
        else:
            if len(rep.alphabet) != 1 or args.n is None:
                raise UsageError("eval needs --word, or --n with a one-letter alphabet")
            a = rep.alphabet[0]
            rows = [[str(n), _fmt(wfa.eval_word(rep, [a] * n))] for n in range(args.n + 1)]
            _write_text(args.out, _csv_text(rows, ["n", "value"] if args.header else None))


def cmd_experiment(args):
    if args.kind == "convergence":
        R = 500 if args.R is None else args.R
        curve = experiments.convergence_curve(R=R, iterations=args.iterations, seed=args.seed)
        rows = [[str(int(t)), _fmt(we), _fmt(me)] for t, we, me in curve]
        _write_text(args.out, _csv_text(rows, ["iteration", "weight_error", "mean_error"]))
    else:
        R = 20 if args.R is None else args.R
        sizes = tuple(args.sizes) if args.sizes else experiments.DEFAULT_SIZES
        summary = experiments.learning_curve(sizes=sizes, R=R, seed=args.seed, restarts=args.restarts,
                                             n_jobs=args.jobs)
        cols = ["size", "runs", "median_error", "mean_error", "median_weight_error", "median_mean_error",
                "pathological", "failed"]
        ints = {"size", "runs", "pathological", "failed"}
        rows = [[str(r[c]) if c in ints else _fmt(r[c]) for c in cols] for r in summary]
        _write_text(args.out, _csv_text(rows, cols))


# -- parser --------------------------------------------------------------


def _int_at_least(minimum):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if v < minimum:
            raise argparse.ArgumentTypeError(f"expected an integer >= {minimum}, got {v}")
        return v

    return parse


_positive_int = _int_at_least(1)
_nonneg_int = _int_at_least(0)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_nonneg_int, default=0, help="root seed (default 0)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--header", action="store_true", help="CSV files carry a header row")
    common.add_argument("-v", "--verbose", action="store_true")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--restarts", type=_positive_int, default=10)
    solver.add_argument("--tol", type=float, default=1e-12)
    solver.add_argument("--rank-tol", type=float, default=None)
    solver.add_argument("--imag-tol", type=float, default=1e-6)

    parser = argparse.ArgumentParser(prog="negmix", description="Learning negative mixture models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="draw a dataset from a model JSON")
    p.add_argument("--model")
    p.add_argument("--N", type=_positive_int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", parents=[common, solver], help="fit a model to a dataset CSV")
    p.add_argument("--data")
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--trace", help="per-candidate trace CSV")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("decompose", parents=[common, solver], help="recover (w, mu) from M2/M3 tensor JSON")
    p.add_argument("--m2")
    p.add_argument("--m3")
    p.add_argument("--k", type=_positive_int)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("wfa", parents=[common], help="rational-series tools")
    p.add_argument("action", choices=["split", "normalize", "mixture", "eval", "sum"])
    p.add_argument("--wfa", help="WFA JSON file")
    p.add_argument("--word", help="word to evaluate (characters, or space-separated symbols)")
    p.add_argument("--n", type=_nonneg_int, help="evaluate a^0 .. a^n on a one-letter alphabet")
    p.add_argument("--no-check", action="store_true", help="mixture: skip the sums-to-one check")
    p.set_defaults(func=cmd_wfa)

    p = sub.add_parser("experiment", parents=[common], help="reproduce the running-example experiments")
    p.add_argument("kind", choices=["convergence", "learning"])
    p.add_argument("--R", type=_positive_int, help="repetitions (default 500 / 20)")
    p.add_argument("--iterations", type=_positive_int, default=20)
    p.add_argument("--sizes", type=_positive_int, nargs="+")
    p.add_argument("--restarts", type=_positive_int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for idx, err in sorted(exc.failures.items()):
            print(f"  candidate {idx}: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NegMixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
