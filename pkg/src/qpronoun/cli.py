"""Command-line interface: ``qpronoun <subcommand> [options]``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, data, pipeline
from .lexicon import Lexicon, bundled_lexicon
from .model import MODELS, CircuitConfig
from .train import OOV_POLICIES, Hyperparams, ParamStore, evaluate, multi_seed, write_curve


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Keys use option names without dashes."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _fractions(text: str) -> tuple:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fractions {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("need three comma-separated fractions")
    return parts


def _lexicon(args) -> Lexicon:
    return Lexicon.load(args.lexicon) if args.lexicon else bundled_lexicon()


def _splits(args):
    """Explicit split files, or the bundled dataset split with ``--split-seed``."""
    if args.train_file:
        train = data.load(args.train_file)
        val = data.load(args.val_file) if args.val_file else []
        test = data.load(args.test_file) if args.test_file else []
        return train, val, test
    sp = data.split(data.bundled_dataset(), seed=args.split_seed)
    return sp.train, sp.val, sp.test


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _manifest(args, **extra) -> dict:
    settings = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    return {"version": __version__, "command": args.command, "settings": settings, **extra}


# --- subcommands ----------------------------------------------------------


def cmd_generate(args) -> int:
    specs = [data.TemplateSpec.load(p) for p in args.spec] if args.spec else data.bundled_specs()
    entries = data.generate(specs, args.n, args.seed)
    sp = data.split(entries, args.fractions, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data.save(out / "dataset.tsv", entries)
    for name in ("train", "val", "test"):
        data.save(out / f"{name}.tsv", getattr(sp, name))
    data.build_lexicon(specs).save(out / "lexicon.tsv")
    report = {
        "entries": len(entries), "train": len(sp.train), "val": len(sp.val), "test": len(sp.test),
        "vocabulary_overlap": sp.vocabulary_overlap,
    }
    _write_json(out / "manifest.json", _manifest(args, dataset_sha256=data.digest(entries), report=report))
    print(json.dumps(report, sort_keys=True))
    return 0


def _hyperparams(args) -> Hyperparams:
    try:
        return Hyperparams(a=args.a, c=args.c, A=args.A, alpha=args.alpha, gamma=args.gamma,
                           epochs=args.epochs, epsilon=args.epsilon, batch_size=args.batch_size)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _train(args, model: str) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    lex = _lexicon(args)
    train, val, test = _splits(args)
    hp = _hyperparams(args)
    cfg = CircuitConfig(model=model, layers=args.layers)
    results, agg = multi_seed(train, val, hp, lex, runs=args.runs, base_seed=args.seed, config=cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    per_seed = []
    for store, hist in results:
        store.save(out / f"params_seed{hist.seed}.tsv")
        write_curve(out / f"curve_seed{hist.seed}.csv", hist.loss, hist.accuracy)
        row = {"seed": hist.seed, "train": hist.final_train, "val": hist.final_val}
        if test:
            row["test"] = evaluate(store, test, lex, cfg, policy=args.policy)
        per_seed.append(row)
    agg.to_csv(out / "curves_aggregate.csv")
    summary = {"runs": per_seed}
    if test:
        summary["mean_test_accuracy"] = float(np.mean([r["test"]["accuracy"] for r in per_seed]))
    _write_json(out / "metrics.json", summary)
    digests = {name: data.digest(part) for name, part in (("train", train), ("val", val), ("test", test))}
    _write_json(out / "manifest.json", _manifest(args, model=model, hyperparams=hp.asdict(), dataset_sha256=digests))
    print(json.dumps({"model": model, "runs": len(results),
                      "train_accuracy": [float(agg.mean_accuracy[0]), float(np.mean([r["train"]["accuracy"] for r in per_seed]))],
                      **({"mean_test_accuracy": summary["mean_test_accuracy"]} if test else {})}))
    return 0


def cmd_train(args) -> int:
    return _train(args, args.model)


def cmd_baseline(args) -> int:
    return _train(args, "bow")


def cmd_eval(args) -> int:
    lex = _lexicon(args)
    entries = data.load(args.data)
    store = ParamStore.load(args.params, seed=args.seed)
    metrics = evaluate(store, entries, lex, CircuitConfig(model=args.model, layers=args.layers), policy=args.policy)
    print(json.dumps(metrics, sort_keys=True))
    return 0


def cmd_resolve(args) -> int:
    if bool(args.text) == bool(args.input):
        raise UsageError("give exactly one of --text or --input")
    lex = _lexicon(args)
    store = ParamStore.load(args.params, seed=args.seed)
    cfg = CircuitConfig(model="sllm", layers=args.layers)
    if args.text:
        items = [("0", args.text)]
    else:
        items = [(i, (s1, s2)) for i, s1, s2, _ in pipeline.discourses(data.load(args.input))]
    preds = [pipeline.resolve(d, store, lex, cfg, policy=args.policy, id=i) for i, d in items]
    text = pipeline.predictions_to_csv(preds)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_combine(args) -> int:
    quantum = pipeline.predictions_from_csv(pipeline.read_text(args.quantum))
    classical = pipeline.referents_from_csv(pipeline.read_text(args.classical))
    if args.gold.endswith(".tsv"):
        gold = {i: g for i, _, _, g in pipeline.discourses(data.load(args.gold))}
    else:
        gold = {p.id: p.referent for p in pipeline.referents_from_csv(pipeline.read_text(args.gold))}
    combined, report = pipeline.combine(quantum, classical, gold)
    if args.out:
        Path(args.out).write_text(pipeline.referents_to_csv(combined), encoding="utf-8")
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_simcheck(args) -> int:
    from .sim import dense_oracle, random_circuit, run

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.circuits):
        c, params = random_circuit(rng, max_qubits=args.max_qubits, max_gates=args.max_gates)
        worst = max(worst, float(np.max(np.abs(run(c, params).amplitudes - dense_oracle(c, params).amplitudes))))
    ok = worst <= args.tolerance
    print(json.dumps({"circuits": args.circuits, "max_deviation": worst, "tolerance": args.tolerance, "ok": ok}))
    return 0 if ok else 1


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpronoun", description=__doc__.splitlines()[0], allow_abbrev=False)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value file supplying option defaults")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--lexicon", help="lexicon TSV (default: bundled)")
        sp.add_argument("--layers", type=int, default=1)
        sp.add_argument("--policy", choices=OOV_POLICIES, default="strict", help="unseen-parameter policy")

    def training(sp):
        sp.add_argument("--train-file")
        sp.add_argument("--val-file")
        sp.add_argument("--test-file")
        sp.add_argument("--split-seed", type=int, default=0)
        sp.add_argument("--epochs", type=int, default=2000)
        sp.add_argument("--a", type=float, default=0.1)
        sp.add_argument("--c", type=float, default=0.06)
        sp.add_argument("--A", type=float, default=20.0)
        sp.add_argument("--alpha", type=float, default=0.602)
        sp.add_argument("--gamma", type=float, default=0.101)
        sp.add_argument("--epsilon", type=float, default=1e-9)
        sp.add_argument("--batch-size", type=int, default=None)
        sp.add_argument("--runs", type=int, default=15)
        sp.add_argument("--out", required=True)

    g = sub.add_parser("generate", help="expand templates and split into train/val/test", allow_abbrev=False)
    common(g)
    g.add_argument("--spec", action="append", help="template spec file (repeatable; default: bundled)")
    g.add_argument("--n", type=int, default=data.BUNDLED_SIZE)
    g.add_argument("--fractions", type=_fractions, default=(0.6, 0.2, 0.2))
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="multi-seed SPSA training", allow_abbrev=False)
    common(t)
    training(t)
    t.add_argument("--model", choices=MODELS, default="sllm")
    t.set_defaults(func=cmd_train)

    b = sub.add_parser("baseline", help="train and evaluate the bag-of-words baseline", allow_abbrev=False)
    common(b)
    training(b)
    b.set_defaults(func=cmd_baseline)

    e = sub.add_parser("eval", help="metrics of a parameter file on a dataset", allow_abbrev=False)
    common(e)
    e.add_argument("--params", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--model", choices=MODELS, default="sllm")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("resolve", help="pick the referent of the pronoun", allow_abbrev=False)
    common(r)
    r.add_argument("--params", required=True)
    r.add_argument("--text", help='two sentences, e.g. "The students read the books. They were learning."')
    r.add_argument("--input", help="dataset TSV; one prediction per sentence pair")
    r.add_argument("--out")
    r.set_defaults(func=cmd_resolve)

    c = sub.add_parser("combine", help="fall back to quantum predictions where the classical one fails", allow_abbrev=False)
    common(c)
    c.add_argument("--quantum", required=True, help="predictions CSV")
    c.add_argument("--classical", required=True, help="id,referent CSV with EMPTY sentinel")
    c.add_argument("--gold", required=True, help="id,referent CSV or dataset TSV")
    c.add_argument("--out")
    c.set_defaults(func=cmd_combine)

    s = sub.add_parser("simcheck", help="random-circuit agreement of the simulator and the dense oracle", allow_abbrev=False)
    common(s)
    s.add_argument("--circuits", type=int, default=200)
    s.add_argument("--max-qubits", type=int, default=6)
    s.add_argument("--max-gates", type=int, default=30)
    s.add_argument("--tolerance", type=float, default=1e-12)
    s.set_defaults(func=cmd_simcheck)
    return p


def _config_path(argv: list) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv: list) -> None:
    """Turn a ``--config`` file into subcommand defaults; command-line flags still win."""
    path = _config_path(argv)
    choices = parser._subparsers._group_actions[0].choices
    if path is None or not argv or argv[0] not in choices:
        return
    sub = choices[argv[0]]
    try:
        settings = read_config(path)
    except (OSError, UsageError) as exc:
        sub.error(str(exc))
    actions = {a.dest: a for a in sub._actions}
    unknown = sorted(k for k in settings if k not in actions or k in ("config", "help"))
    if unknown:
        sub.error(f"unknown config keys: {', '.join(unknown)}")
    for key, value in settings.items():
        actions[key].required = False
        sub.set_defaults(**{key: _coerce(sub, actions[key], value)})


def _coerce(sub, action, value):
    if action.type is None or value == "":
        return value
    try:
        value = action.type(value)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        sub.error(f"config {action.dest}: {exc}")
    if action.choices is not None and value not in action.choices:
        sub.error(f"config {action.dest}: {value!r} is not one of {list(action.choices)}")
    return value


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors by exiting with 2
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qpronoun {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to exit code 1
        print(f"qpronoun {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
