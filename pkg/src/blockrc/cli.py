"""Command-line surface.

Exit codes: 0 success, 2 invalid arguments, 3 data/parse error, 4 numeric
failure, 5 construction stalled.
"""

import argparse
import os
import sys

from .bench import (
    csv_task,
    debutanizer_task,
    emit_grid,
    emit_report,
    grid_search,
    mg_task,
    plant_task,
    run_trials,
)
from .builder import TrainConfig, train_brscn, train_esn, train_rscn
from .data import (
    MGConfig,
    add_noise_validation,
    build_mg_task,
    csv_dims,
    debutanizer_features,
    gen_mackey_glass,
    gen_plant,
    load_csv,
    save_csv,
)
from .errors import ConstructionStalled, DataError, InvalidArgumentError, NumericFailure
from .online import run_online
from .reservoir import evaluate, load_model, save_model


def _write_splits(out_dir, train, val, test):
    os.makedirs(out_dir, exist_ok=True)
    for tag, ds in (("train", train), ("val", val), ("test", test)):
        save_csv(ds, os.path.join(out_dir, f"{tag}.csv"))


def _cmd_gen(args):
    if args.what == "mg":
        series = gen_mackey_glass(MGConfig(seed=args.seed))
        _write_splits(args.out, *build_mg_task(series, args.variant))
    elif args.what == "plant":
        _write_splits(args.out, *gen_plant(args.seed))
    else:  # debutanizer feature prep from the raw column data
        raw = load_csv(args.raw, k=7, l=1, washout=0)
        train, test = debutanizer_features(raw, args.mode)
        val = add_noise_validation(test, args.sigma, args.seed)
        _write_splits(args.out, train, val, test)
    return 0


def _load_cfg(args):
    return TrainConfig.from_json(args.config) if args.config else TrainConfig()


def _load_split(path, cfg):
    k, l = csv_dims(path)
    return load_csv(path, k, l, washout=cfg.washout)


def _cmd_train(args):
    cfg = _load_cfg(args)
    train = _load_split(args.train, cfg)
    log = None
    if args.model == "esn":
        model = train_esn(train, cfg, args.nodes)
    else:
        if not args.val:
            raise InvalidArgumentError(f"--val is required for {args.model}")
        val = _load_split(args.val, cfg)
        trainer = train_brscn if args.model == "brscn" else train_rscn
        model, log = trainer(train, val, cfg)
    save_model(model, args.out)
    if args.log and log is not None:
        log.write_csv(args.log)
    if log is not None and log.termination_reason == "stalled":
        print("construction stalled; partial model written", file=sys.stderr)
        return 5
    return 0


def _cmd_eval(args):
    model = load_model(args.model)
    data = load_csv(args.data, model.k, model.l, washout=model.washout)
    print(evaluate(model, data))
    return 0


def _task_from_args(args, cfg):
    if args.task in ("mg", "mg1", "mg2"):
        return mg_task(args.task)
    if args.task == "plant":
        return plant_task()
    if not (args.train and args.val and args.test):
        raise InvalidArgumentError("--task csv requires --train, --val and --test files")
    k, l = csv_dims(args.train)
    return csv_task(args.train, args.val, args.test, k, l, cfg.washout)


def _cmd_bench(args):
    cfg = _load_cfg(args)
    task = _task_from_args(args, cfg)
    report = run_trials(task, args.model, cfg, args.trials, args.seed, esn_nodes=args.nodes)
    emit_report(report, args.out)
    return 0


def _cmd_gridsearch(args):
    cfg = _load_cfg(args)
    task = _task_from_args(args, cfg)
    values = [v for v in args.values.split(",") if v]
    result = grid_search(
        task, args.model, cfg, args.param, values, args.trials, args.seed, esn_nodes=args.nodes
    )
    emit_grid(result, args.out)
    print(result.chosen)
    return 0


def _pe_path(log_path):
    stem, ext = os.path.splitext(log_path)
    return f"{stem}_pe{ext or '.csv'}"


def _cmd_online(args):
    model = load_model(args.model)
    stream = load_csv(args.stream, model.k, model.l, washout=0)
    w_ref = load_model(args.wref).w_out if args.wref else None
    log = run_online(
        model,
        stream,
        gamma=args.gamma,
        c=args.c,
        n_w=args.nw,
        eta1=args.eta1,
        eta2=args.eta2,
        w_reference=w_ref,
    )
    log.write_csv(args.log)
    log.write_pe_csv(_pe_path(args.log))
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="blockrc",
        description="Constructive reservoir-computing toolkit: data generation, "
        "training, evaluation, benchmarking, online adaptation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate benchmark datasets as CSV splits")
    gen_sub = gen.add_subparsers(dest="what", required=True)
    g_mg = gen_sub.add_parser("mg", help="chaotic delay-differential series task")
    g_mg.add_argument("--variant", choices=("mg", "mg1", "mg2"), default="mg")
    g_mg.add_argument("--seed", type=int, default=0)
    g_mg.add_argument("--out", required=True)
    g_mg.set_defaults(func=_cmd_gen)
    g_plant = gen_sub.add_parser("plant", help="nonlinear plant identification task")
    g_plant.add_argument("--seed", type=int, default=0)
    g_plant.add_argument("--out", required=True)
    g_plant.set_defaults(func=_cmd_gen)
    g_deb = gen_sub.add_parser("debutanizer", help="soft-sensor features from raw column data")
    g_deb.add_argument("--raw", required=True)
    g_deb.add_argument("--mode", choices=("reduced", "full"), default="reduced")
    g_deb.add_argument("--sigma", type=float, default=0.05)
    g_deb.add_argument("--seed", type=int, default=0)
    g_deb.add_argument("--out", required=True)
    g_deb.set_defaults(func=_cmd_gen)

    tr = sub.add_parser("train", help="train one model from CSV splits")
    tr.add_argument("--model", choices=("esn", "rscn", "brscn"), required=True)
    tr.add_argument("--config", help="hyperparameter JSON (defaults when omitted)")
    tr.add_argument("--train", required=True)
    tr.add_argument("--val", help="validation split (required for rscn/brscn)")
    tr.add_argument("--out", required=True, help="model JSON path")
    tr.add_argument("--log", help="construction trace CSV path")
    tr.add_argument("--nodes", type=int, default=100, help="reservoir size for esn")
    tr.set_defaults(func=_cmd_train)

    ev = sub.add_parser("eval", help="print a model's NRMSE on a dataset")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.set_defaults(func=_cmd_eval)

    be = sub.add_parser("bench", help="repeated seeded trials with a JSON report")
    be.add_argument("--task", choices=("mg", "mg1", "mg2", "plant", "csv"), required=True)
    be.add_argument("--model", choices=("esn", "rscn", "brscn"), required=True)
    be.add_argument("--config")
    be.add_argument("--trials", type=int, default=20)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--out", required=True)
    be.add_argument("--nodes", type=int, default=100)
    be.add_argument("--train", help="train CSV for --task csv")
    be.add_argument("--val", help="validation CSV for --task csv")
    be.add_argument("--test", help="test CSV for --task csv")
    be.set_defaults(func=_cmd_bench)

    gs = sub.add_parser("gridsearch", help="sweep a size parameter by validation error")
    gs.add_argument("--param", choices=("nsub", "nodes"), required=True)
    gs.add_argument("--values", required=True, help="comma-separated integers")
    gs.add_argument("--task", choices=("mg", "mg1", "mg2", "plant", "csv"), required=True)
    gs.add_argument("--model", choices=("esn", "rscn", "brscn"), required=True)
    gs.add_argument("--config")
    gs.add_argument("--trials", type=int, default=5, help="trials per grid point")
    gs.add_argument("--seed", type=int, default=0)
    gs.add_argument("--out", required=True)
    gs.add_argument("--nodes", type=int, default=100)
    gs.add_argument("--train")
    gs.add_argument("--val")
    gs.add_argument("--test")
    gs.set_defaults(func=_cmd_gridsearch)

    on = sub.add_parser("online", help="adapt a model's readout over a stream")
    on.add_argument("--model", required=True)
    on.add_argument("--stream", required=True)
    on.add_argument("--gamma", type=float, default=1.0)
    on.add_argument("--c", type=float, default=1e-4)
    on.add_argument("--nw", type=int, default=50)
    on.add_argument("--eta1", type=float, required=True)
    on.add_argument("--eta2", type=float, required=True)
    on.add_argument("--wref", help="reference model JSON for weight-error tracking")
    on.add_argument("--log", required=True)
    on.set_defaults(func=_cmd_online)

    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidArgumentError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except NumericFailure as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except ConstructionStalled as err:
        print(f"error: {err}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
